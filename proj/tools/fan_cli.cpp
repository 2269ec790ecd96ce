#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "fan/config.hpp"
#include "fan/report.hpp"

namespace {

using namespace fan;

int fail_line(const char* kind, const std::string& msg) {
    std::cerr << "ERROR " << kind << ": " << msg << "\n";
    return kind == std::string("divergence") ? 1 : 2;
}

std::string default_out_root() {
    if (const char* env = std::getenv("FAN_OUT_ROOT")) return env;
    return "out";
}

Scale parse_scale(const std::string& s) {
    if (s == "desk") return Scale::Desk;
    if (s == "paper") return Scale::Paper;
    throw ConfigError("unknown scale '" + s + "' (expected desk or paper)");
}

ExperimentConfig load_config(const std::string& config_path, const std::string& preset,
                             const std::string& scale, std::uint64_t seed,
                             const std::vector<std::string>& overrides) {
    ExperimentConfig base;
    if (!preset.empty()) base = preset_base_config(preset, parse_scale(scale), seed);
    base.seed = seed;
    ExperimentConfig cfg = config_path.empty()
                               ? parse_config_text("", overrides, std::move(base))
                               : parse_config(config_path, overrides, std::move(base));
    cfg.validate();
    return cfg;
}

void print_final(const RunResult& r) {
    const MetricsRecord& m = r.final_record();
    std::printf("%-16s epoch %-6d train_mse %.6g id_mse %.6g ood_mse %.6g params %lld%s\n",
                r.config.display_name().c_str(), m.epoch, m.train_mse, m.id_mse, m.ood_mse,
                static_cast<long long>(r.cost.exact_params),
                r.diverged ? "  [diverged]" : "");
}

std::string run_dir(const std::string& out_root, const ExperimentConfig& cfg) {
    const std::string dir =
        out_root + "/" + cfg.display_name() + "-s" + std::to_string(cfg.seed);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_resolved(const std::string& dir, const ExperimentConfig& cfg) {
    std::ofstream f(dir + "/resolved.cfg", std::ios::binary);
    f << describe(cfg);
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::string& scale, std::uint64_t seed,
              const std::vector<std::string>& overrides, const std::string& out_root) {
    const ExperimentConfig cfg = load_config(config_path, preset, scale, seed, overrides);
    const RunResult r = train(cfg);
    const std::string dir = run_dir(out_root, cfg);
    write_resolved(dir, cfg);
    emit_csv({r}, dir + "/metrics.csv");
    emit_svg_plot({r}, PlotKind::LossCurve, dir + "/loss.svg");
    if (cfg.task.input_dim() == 1 && cfg.task.kind != TaskSpec::Kind::Symbolic)
        emit_svg_plot({r}, PlotKind::FitCurve, dir + "/fit.svg");
    print_final(r);
    std::printf("wrote %s\n", dir.c_str());
    if (r.diverged)
        return fail_line("divergence", r.config.display_name() + " diverged at epoch " +
                                           std::to_string(r.diverged_epoch));
    return 0;
}

int cmd_preset(const std::string& name, const std::string& scale, std::uint64_t seed,
               const std::string& out_root) {
    const PresetOutcome outcome = run_preset(name, parse_scale(scale), seed, out_root);
    for (const std::string& f : outcome.files)
        std::printf("wrote %s/%s\n", outcome.out_dir.c_str(), f.c_str());
    if (!outcome.ok) {
        std::string names;
        for (const std::string& n : outcome.diverged) names += (names.empty() ? "" : ",") + n;
        return fail_line("divergence", "diverged runs: " + names);
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& preset,
                const std::string& scale, std::uint64_t seed,
                const std::vector<std::string>& overrides, const std::string& out_root) {
    if (!preset.empty()) return cmd_preset(preset, scale, seed, out_root);
    if (config_paths.size() < 2)
        throw ConfigError("compare needs --preset or at least two --config files");
    std::vector<ExperimentConfig> cfgs;
    for (const std::string& p : config_paths)
        cfgs.push_back(load_config(p, "", scale, seed, overrides));
    const ComparisonResult cr = compare(cfgs);
    const std::string dir = out_root + "/compare-s" + std::to_string(seed);
    std::filesystem::create_directories(dir);
    emit_csv(cr.runs, dir + "/metrics.csv");
    emit_svg_plot(cr.runs, PlotKind::LossCurve, dir + "/loss.svg");
    if (cfgs.front().task.input_dim() == 1 && cfgs.front().task.kind != TaskSpec::Kind::Symbolic)
        emit_svg_plot(cr.runs, PlotKind::FitCurve, dir + "/fit.svg");
    bool any_diverged = false;
    std::printf("ranked by final ood_mse:\n");
    for (std::size_t idx : cr.ranking) {
        print_final(cr.runs[idx]);
        std::ofstream f(dir + "/resolved_" + cr.runs[idx].config.display_name() + ".cfg",
                        std::ios::binary);
        f << describe(cr.runs[idx].config);
        any_diverged = any_diverged || cr.runs[idx].diverged;
    }
    std::printf("wrote %s\n", dir.c_str());
    if (any_diverged) return fail_line("divergence", "one or more runs diverged");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& scale, std::uint64_t seed,
              const std::vector<std::string>& overrides, std::vector<double> ratios,
              const std::string& out_root) {
    if (config_path.empty() && overrides.empty())
        return cmd_preset("fig7-dp-sweep", scale, seed, out_root);
    ExperimentConfig base = load_config(config_path, "fig7-dp-sweep", scale, seed, overrides);
    if (ratios.empty()) ratios = {0.0, 0.125, 0.25, 0.375, 0.5};
    std::vector<RunResult> runs;
    const auto rows = sweep_dp(base, ratios, &runs);
    const std::string dir = out_root + "/sweep-dp-s" + std::to_string(seed);
    std::filesystem::create_directories(dir);
    emit_csv(runs, dir + "/metrics.csv");
    emit_svg_plot(runs, PlotKind::Sweep, dir + "/sweep.svg");
    bool any_diverged = false;
    for (const SweepRow& r : rows) {
        std::printf("ratio %-6g d_p %-5zu train_mse %.6g ood_mse %.6g%s\n", r.ratio, r.d_p,
                    r.final_metrics.train_mse, r.final_metrics.ood_mse,
                    r.diverged ? "  [diverged]" : "");
        any_diverged = any_diverged || r.diverged;
    }
    std::printf("wrote %s\n", dir.c_str());
    if (any_diverged) return fail_line("divergence", "one or more sweep runs diverged");
    return 0;
}

int cmd_depth(const std::string& config_path, const std::string& scale, std::uint64_t seed,
              const std::vector<std::string>& overrides, std::vector<int> depths, bool residual,
              const std::string& out_root) {
    if (config_path.empty() && overrides.empty())
        return cmd_preset("fig9-depth", scale, seed, out_root);
    ExperimentConfig base = load_config(config_path, "fig9-depth", scale, seed, overrides);
    if (depths.empty()) depths = {1, 2, 4, 6};
    std::vector<RunResult> runs;
    const auto rows = depth_study(base, depths, residual, &runs);
    const std::string dir = out_root + "/depth-s" + std::to_string(seed);
    std::filesystem::create_directories(dir);
    emit_csv(runs, dir + "/metrics.csv");
    emit_svg_plot(runs, PlotKind::LossCurve, dir + "/loss.svg");
    bool any_diverged = false;
    for (const DepthRow& r : rows) {
        std::printf("depth %-3d params %-9lld best_ood_mse %.6g final_ood_mse %.6g%s\n", r.depth,
                    static_cast<long long>(r.exact_params), r.best_ood_mse,
                    r.final_metrics.ood_mse, r.diverged ? "  [diverged]" : "");
        any_diverged = any_diverged || r.diverged;
    }
    std::printf("wrote %s\n", dir.c_str());
    if (any_diverged) return fail_line("divergence", "one or more depth runs diverged");
    return 0;
}

int cmd_bench(const std::string& scale, std::uint64_t seed, const std::string& out_root) {
    return cmd_preset("table5-bench", scale, seed, out_root);
}

// Central-difference check of every parameter gradient on a tiny network of
// each layer kind; reports the worst relative error per kind.
int cmd_gradcheck(std::uint64_t seed) {
    constexpr double kEps = 1e-5, kTol = 1e-4;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool ok = true;
    for (LayerKind kind : {LayerKind::Fan, LayerKind::FanGated, LayerKind::Mlp, LayerKind::Fsnn,
                           LayerKind::FnnAct, LayerKind::Snake}) {
        Network net = build_network(stack_spec(kind, 2, 8, 1, 2), seed + 1);
        Tensor x(2, 3), y(1, 3);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = u(rng);

        const auto loss_value = [&] {
            Tape tape;
            return tape.value(tape.mse_loss(net.forward(tape, tape.constant(x)),
                                            tape.constant(y)))(0, 0);
        };
        auto params = net.parameters();
        zero_grad(params);
        {
            Tape tape;
            tape.backward(tape.mse_loss(net.forward(tape, tape.constant(x)), tape.constant(y)));
        }
        double worst = 0.0;
        for (Parameter* p : params)
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double saved = p->value.data()[i];
                p->value.data()[i] = saved + kEps;
                const double hi = loss_value();
                p->value.data()[i] = saved - kEps;
                const double lo = loss_value();
                p->value.data()[i] = saved;
                const double fd = (hi - lo) / (2.0 * kEps);
                const double an = p->grad.data()[i];
                worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(an)));
            }
        const bool pass = worst <= kTol;
        ok = ok && pass;
        std::printf("%-10s max_rel_err %.3e  %s\n", to_string(kind), worst,
                    pass ? "ok" : "FAIL");
    }
    if (!ok) return fail_line("numeric", "gradient check failed");
    return 0;
}

int cmd_count(const std::string& config_path, const std::string& preset, const std::string& scale,
              std::uint64_t seed, const std::vector<std::string>& overrides) {
    const ExperimentConfig cfg = load_config(config_path, preset, scale, seed, overrides);
    const std::size_t d_in = cfg.task.input_dim();
    const NetworkSpec spec = cfg.model.build(d_in, 1);
    const CostReport total = count_costs(spec);
    std::printf("model %s  layers %zu  d_in %zu\n", cfg.model.label().c_str(),
                spec.layers.size(), d_in);
    std::printf("%-6s %-6s %-6s %-6s %12s %12s %14s %14s\n", "kind", "d_in", "d_out", "d_p",
                "params_exact", "params_table", "flops_exact", "flops_table");
    for (const LayerSpec& l : spec.layers) {
        const CostReport c = count_costs(l);
        std::printf("%-6s %-6zu %-6zu %-6zu %12lld %12lld %14lld %14lld\n", to_string(l.kind),
                    l.d_in, l.d_out, l.d_p, static_cast<long long>(c.exact_params),
                    static_cast<long long>(c.table_params),
                    static_cast<long long>(c.exact_flops),
                    static_cast<long long>(c.table_flops));
    }
    std::printf("%-27s %12lld %12lld %14lld %14lld\n", "total",
                static_cast<long long>(total.exact_params),
                static_cast<long long>(total.table_params),
                static_cast<long long>(total.exact_flops),
                static_cast<long long>(total.table_flops));
    return 0;
}

int cmd_list_presets() {
    for (const PresetInfo& p : list_presets())
        std::printf("%-24s %s\n", p.name.c_str(), p.description.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodicity-modeling toolkit"};
    app.require_subcommand(1);

    std::string config_path, preset, scale = "desk";
    std::vector<std::string> config_paths, overrides;
    std::uint64_t seed = 42;
    std::string out_root = default_out_root();
    std::vector<double> ratios;
    std::vector<int> depths;
    bool residual = true;

    const auto add_common = [&](CLI::App* sub, bool with_config = true) {
        sub->add_option("--seed", seed, "run seed")->capture_default_str();
        sub->add_option("--out", out_root, "output root (env FAN_OUT_ROOT)")
            ->capture_default_str();
        sub->add_option("--scale", scale, "desk or paper")->capture_default_str();
        if (with_config) {
            sub->add_option("--config", config_path, "config file");
            sub->add_option("--preset", preset, "preset name as config base");
            sub->add_option("--set", overrides, "key=value override (repeatable)");
        }
    };

    CLI::App* train = app.add_subcommand("train", "train one model from a config");
    add_common(train);
    CLI::App* comp = app.add_subcommand("compare", "train and rank several models");
    add_common(comp, false);
    comp->add_option("--config", config_paths, "config file (repeatable)");
    comp->add_option("--preset", preset, "comparison preset to execute");
    comp->add_option("--set", overrides, "key=value override (repeatable)");
    CLI::App* sweep = app.add_subcommand("sweep-dp", "sweep the periodic-width ratio");
    add_common(sweep);
    sweep->add_option("--ratio", ratios, "d_p ratio (repeatable)");
    CLI::App* depth = app.add_subcommand("depth", "depth study with residual stacks");
    add_common(depth);
    depth->add_option("--depth", depths, "hidden-layer count (repeatable)");
    depth->add_flag("--residual,!--no-residual", residual, "residual connections");
    CLI::App* bench = app.add_subcommand("bench", "layer forward runtime benchmark");
    add_common(bench, false);
    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gc->add_option("--seed", seed, "run seed")->capture_default_str();
    CLI::App* count = app.add_subcommand("count", "parameter and FLOP accounting");
    add_common(count);
    app.add_subcommand("list-presets", "list the preset catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(config_path, preset, scale, seed, overrides, out_root);
        if (comp->parsed())
            return cmd_compare(config_paths, preset, scale, seed, overrides, out_root);
        if (sweep->parsed())
            return cmd_sweep(config_path, scale, seed, overrides, ratios, out_root);
        if (depth->parsed())
            return cmd_depth(config_path, scale, seed, overrides, depths, residual, out_root);
        if (bench->parsed()) return cmd_bench(scale, seed, out_root);
        if (gc->parsed()) return cmd_gradcheck(seed);
        if (count->parsed()) return cmd_count(config_path, preset, scale, seed, overrides);
        return cmd_list_presets();
    } catch (const ConfigError& e) {
        return fail_line("config", e.what());
    } catch (const NumericError& e) {
        return fail_line("numeric", e.what());
    } catch (const std::exception& e) {
        return fail_line("internal", e.what());
    }
}
