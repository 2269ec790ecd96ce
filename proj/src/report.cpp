#include "fan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fan {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write: " + path);
    return f;
}

}  // namespace

void emit_csv(const std::vector<RunResult>& results, const std::string& path) {
    if (results.empty()) throw ConfigError("emit_csv: no results");
    std::ofstream f = open_out(path);
    f << "run,model,epoch,train_mse,id_mse,ood_mse,train_mae,id_mae,ood_mae,"
         "params_exact,flops_exact,wall_ms\n";
    for (std::size_t r = 0; r < results.size(); ++r) {
        const RunResult& run = results[r];
        for (const MetricsRecord& m : run.history) {
            f << r << ',' << run.config.display_name() << ',' << m.epoch << ','
              << fmt9(m.train_mse) << ',' << fmt9(m.id_mse) << ',' << fmt9(m.ood_mse) << ','
              << fmt9(m.train_mae) << ',' << fmt9(m.id_mae) << ',' << fmt9(m.ood_mae) << ','
              << run.cost.exact_params << ',' << run.cost.exact_flops << ',' << fmt9(0.0)
              << '\n';
        }
    }
}

namespace {

// Fixed palette, cycled per run.
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Frame {
    double x0, x1, y0, y1;            // data ranges
    double px0 = 70, px1 = 850, py0 = 420, py1 = 20;  // pixel box (y flipped)

    double sx(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double sy(double y) const { return py0 + (y - y0) / (y1 - y0) * (py1 - py0); }
};

void svg_header(std::ostream& os) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"460\" "
          "viewBox=\"0 0 880 460\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"880\" height=\"460\" fill=\"white\"/>\n";
}

void svg_axes(std::ostream& os, const Frame& fr, const std::string& xlab,
              const std::string& ylab) {
    os << "<rect x=\"" << fmt6(fr.px0) << "\" y=\"" << fmt6(fr.py1) << "\" width=\""
       << fmt6(fr.px1 - fr.px0) << "\" height=\"" << fmt6(fr.py0 - fr.py1)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt6(fr.px0) << "\" y=\"445\" font-size=\"12\">" << fmt6(fr.x0)
       << "</text>\n";
    os << "<text x=\"" << fmt6(fr.px1 - 40) << "\" y=\"445\" font-size=\"12\">" << fmt6(fr.x1)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << fmt6(fr.py0) << "\" font-size=\"12\">" << fmt6(fr.y0)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << fmt6(fr.py1 + 10) << "\" font-size=\"12\">" << fmt6(fr.y1)
       << "</text>\n";
    os << "<text x=\"440\" y=\"458\" font-size=\"12\" text-anchor=\"middle\">" << xlab
       << "</text>\n";
    os << "<text x=\"14\" y=\"230\" font-size=\"12\" transform=\"rotate(-90 14 230)\" "
          "text-anchor=\"middle\">"
       << ylab << "</text>\n";
}

void svg_polyline(std::ostream& os, const Frame& fr,
                  const std::vector<std::pair<double, double>>& pts, const char* color,
                  bool dashed = false) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (const auto& [x, y] : pts) os << fmt6(fr.sx(x)) << ',' << fmt6(fr.sy(y)) << ' ';
    os << "\"/>\n";
}

void svg_legend(std::ostream& os, const std::vector<std::pair<std::string, const char*>>& items) {
    double y = 36;
    for (const auto& [label, color] : items) {
        os << "<line x1=\"760\" y1=\"" << fmt6(y - 4) << "\" x2=\"790\" y2=\"" << fmt6(y - 4)
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"795\" y=\"" << fmt6(y) << "\" font-size=\"12\">" << label
           << "</text>\n";
        y += 16;
    }
}

double log_clip(double v) { return std::log10(std::max(v, 1e-16)); }

void emit_fit_curve(const std::vector<RunResult>& results, const std::string& path) {
    const RunResult& first = results.front();
    if (first.config.task.kind == TaskSpec::Kind::Symbolic)
        throw ConfigError("fit-curve plot requires a 1-D task");
    const Dataset ds = generate_dataset(first.config.task, first.config.split);

    std::vector<std::size_t> order(ds.tags.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ds.inputs(0, a) < ds.inputs(0, b); });

    double ylo = 0, yhi = 0;
    for (std::size_t j = 0; j < ds.targets.cols(); ++j) {
        ylo = std::min(ylo, ds.targets(0, j));
        yhi = std::max(yhi, ds.targets(0, j));
    }
    const double pad = 0.25 * (yhi - ylo + 1e-12);
    Frame fr{first.config.split.test_lo, first.config.split.test_hi, ylo - pad, yhi + pad};

    std::ofstream f = open_out(path);
    svg_header(f);
    // Shade the training interval in data coordinates.
    f << "<rect x=\"" << fmt6(fr.sx(first.config.split.train_lo)) << "\" y=\"" << fmt6(fr.py1)
      << "\" width=\""
      << fmt6(fr.sx(first.config.split.train_hi) - fr.sx(first.config.split.train_lo))
      << "\" height=\"" << fmt6(fr.py0 - fr.py1) << "\" fill=\"#e8f0e8\"/>\n";
    svg_axes(f, fr, "x", "y");

    std::vector<std::pair<std::string, const char*>> legend;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(order.size());
    for (std::size_t j : order) pts.emplace_back(ds.inputs(0, j), ds.targets(0, j));
    svg_polyline(f, fr, pts, "black");
    legend.emplace_back("target", "black");

    for (std::size_t r = 0; r < results.size(); ++r) {
        Network& net = const_cast<Network&>(results[r].net);
        const Tensor pred = net.forward_value(ds.inputs);
        pts.clear();
        for (std::size_t j : order) {
            const double y = std::clamp(pred(0, j), fr.y0, fr.y1);
            pts.emplace_back(ds.inputs(0, j), y);
        }
        const char* color = kColors[r % std::size(kColors)];
        svg_polyline(f, fr, pts, color);
        legend.emplace_back(results[r].config.display_name(), color);
    }
    svg_legend(f, legend);
    f << "</svg>\n";
}

void emit_loss_curve(const std::vector<RunResult>& results, const std::string& path) {
    double ylo = 1e300, yhi = -1e300;
    int emax = 1;
    for (const RunResult& r : results)
        for (const MetricsRecord& m : r.history) {
            for (double v : {m.train_mse, m.ood_mse}) {
                ylo = std::min(ylo, log_clip(v));
                yhi = std::max(yhi, log_clip(v));
            }
            emax = std::max(emax, m.epoch);
        }
    Frame fr{0, static_cast<double>(emax), ylo - 0.2, yhi + 0.2};

    std::ofstream f = open_out(path);
    svg_header(f);
    svg_axes(f, fr, "epoch", "log10 mse (train solid, ood dashed)");
    std::vector<std::pair<std::string, const char*>> legend;
    for (std::size_t r = 0; r < results.size(); ++r) {
        const char* color = kColors[r % std::size(kColors)];
        std::vector<std::pair<double, double>> train_pts, ood_pts;
        for (const MetricsRecord& m : results[r].history) {
            train_pts.emplace_back(m.epoch, log_clip(m.train_mse));
            ood_pts.emplace_back(m.epoch, log_clip(m.ood_mse));
        }
        svg_polyline(f, fr, train_pts, color);
        svg_polyline(f, fr, ood_pts, color, true);
        std::string label = results[r].config.display_name();
        if (results[r].diverged) label += " (diverged)";
        legend.emplace_back(label, color);
    }
    svg_legend(f, legend);
    f << "</svg>\n";
}

void emit_sweep_plot(const std::vector<RunResult>& results, const std::string& path) {
    double ylo = 1e300, yhi = -1e300;
    for (const RunResult& r : results) {
        ylo = std::min({ylo, log_clip(r.final_record().train_mse),
                        log_clip(r.final_record().ood_mse)});
        yhi = std::max({yhi, log_clip(r.final_record().train_mse),
                        log_clip(r.final_record().ood_mse)});
    }
    Frame fr{0.0, 0.5, ylo - 0.2, yhi + 0.2};

    std::ofstream f = open_out(path);
    svg_header(f);
    svg_axes(f, fr, "d_p / d_out", "log10 final mse (train solid, ood dashed)");
    std::vector<std::pair<double, double>> train_pts, ood_pts;
    for (const RunResult& r : results) {
        const double x = r.config.model.dp_ratio;
        train_pts.emplace_back(x, log_clip(r.final_record().train_mse));
        ood_pts.emplace_back(x, log_clip(r.final_record().ood_mse));
    }
    svg_polyline(f, fr, train_pts, kColors[0]);
    svg_polyline(f, fr, ood_pts, kColors[0], true);
    svg_legend(f, {{"train", kColors[0]}});
    f << "</svg>\n";
}

}  // namespace

void emit_svg_plot(const std::vector<RunResult>& results, PlotKind kind, const std::string& path) {
    if (results.empty()) throw ConfigError("emit_svg_plot: no results");
    switch (kind) {
        case PlotKind::FitCurve: emit_fit_curve(results, path); break;
        case PlotKind::LossCurve: emit_loss_curve(results, path); break;
        case PlotKind::Sweep: emit_sweep_plot(results, path); break;
    }
}

// ---------------------------------------------------------------------------
// Preset catalog
// ---------------------------------------------------------------------------

namespace {

struct ScaleParams {
    double density;       // grid points per period
    std::size_t d_h_main; // fig1 width
    std::size_t d_h_small;
    double lr;
    int epoch_mult;
};

ScaleParams scale_params(Scale s) {
    if (s == Scale::Paper) return {10000.0, 2048, 2048, 1e-5, 25};
    return {64.0, 256, 128, 1e-3, 1};
}

TaskSpec sin_task() { return {}; }

TaskSpec mod_task(double k) {
    TaskSpec t;
    t.kind = TaskSpec::Kind::Mod;
    t.modulus = k;
    return t;
}

TaskSpec sum_task() {
    TaskSpec t;
    t.kind = TaskSpec::Kind::SumSinusoids;
    t.terms = {{1.0, 1.0, 0.0}, {0.5, 2.0, 0.7}, {0.8, 0.5, 1.1}};
    return t;
}

TaskSpec complex_task(bool variant_b = false) {
    TaskSpec t;
    t.kind = variant_b ? TaskSpec::Kind::ComplexPeriodicB : TaskSpec::Kind::ComplexPeriodicA;
    return t;
}

TaskSpec square_task() {
    TaskSpec t;
    t.kind = TaskSpec::Kind::SquareWave;
    return t;
}

SplitSpec split_for(const TaskSpec& t, double density) {
    SplitSpec s;
    s.points_per_period = density;
    switch (t.kind) {
        case TaskSpec::Kind::Sin:
        case TaskSpec::Kind::SumSinusoids:
        case TaskSpec::Kind::SquareWave:
            s.period_hint = 2.0 * kPi;
            s.train_lo = -4.0 * kPi;
            s.train_hi = 4.0 * kPi;
            s.test_lo = -16.0 * kPi;
            s.test_hi = 16.0 * kPi;
            break;
        case TaskSpec::Kind::Mod:
            s.period_hint = t.modulus;
            s.train_lo = -2.0 * t.modulus;
            s.train_hi = 2.0 * t.modulus;
            s.test_lo = -6.0 * t.modulus;
            s.test_hi = 6.0 * t.modulus;
            break;
        default:  // complex periodicity family
            s.period_hint = 3.0;
            s.train_lo = -6.0;
            s.train_hi = 6.0;
            s.test_lo = -12.0;
            s.test_hi = 12.0;
            break;
    }
    return s;
}

struct Group {
    std::string tag;  // task label used in file names
    std::vector<ExperimentConfig> configs;
};

ExperimentConfig base_cfg(const TaskSpec& task, const ScaleParams& sp, int epochs,
                          std::uint64_t seed) {
    ExperimentConfig c;
    c.task = task;
    c.split = split_for(task, sp.density);
    c.lr = sp.lr;
    c.epochs = epochs * sp.epoch_mult;
    c.eval_every = std::max(1, c.epochs / 40);
    c.seed = seed;
    return c;
}

ModelSpec model_of(LayerKind kind, std::size_t d_h, int n_hidden = 2) {
    ModelSpec m;
    m.kind = kind;
    m.hidden = d_h;
    m.n_hidden = n_hidden;
    return m;
}

std::int64_t fan_params(std::size_t d_h, int n_hidden) {
    return count_costs(stack_spec(LayerKind::Fan, 1, d_h, 1, n_hidden)).exact_params;
}

/// Baselines are width-adjusted to match the FAN stack's parameter count.
ExperimentConfig with_model(ExperimentConfig base, ModelSpec m, const std::string& tag) {
    base.model = m;
    base.name = tag.empty() ? m.label() : tag + "_" + m.label();
    return base;
}

std::vector<ExperimentConfig> model_zoo(const ExperimentConfig& base, std::size_t d_h,
                                        const std::vector<LayerKind>& kinds,
                                        const std::string& tag) {
    const std::int64_t target = fan_params(d_h, 2);
    std::vector<ExperimentConfig> cfgs;
    for (LayerKind k : kinds) {
        ModelSpec m = model_of(k, d_h);
        if (k != LayerKind::Fan && k != LayerKind::FanGated) m.match_params = target;
        cfgs.push_back(with_model(base, m, tag));
    }
    return cfgs;
}

struct PresetDef {
    const char* name;
    const char* description;
};

const PresetDef kPresets[] = {
    {"fig1-sin", "FAN vs parameter-matched MLP on y = sin(x), wide OOD interval"},
    {"fig3-grid", "periodicity task grid: sin / mod / sinusoid mix, FAN vs gated FAN vs MLP"},
    {"fig4-losscurves", "training and test loss curves on the complex periodic task"},
    {"fig6-fourier-baselines", "complex periodicity: FAN vs MLP, FNN, Snake, FSNN"},
    {"fig8-extended", "extended task set: square wave, complex variant B, mod"},
    {"appD-snake", "FAN vs Snake activation on sin and the complex periodic task"},
    {"fig7-dp-sweep", "d_p ratio sweep {0, 1/8, 1/4, 3/8, 1/2} on the sin task"},
    {"fig9-depth", "deep FAN with residual connections, depth study"},
    {"table1-accounting", "exact vs closed-form parameter and FLOP accounting grid"},
    {"table5-bench", "FAN vs MLP layer forward runtime at square dims up to 8192"},
};

std::vector<Group> compare_groups(const std::string& name, const ScaleParams& sp,
                                  std::uint64_t seed) {
    std::vector<Group> groups;
    if (name == "fig1-sin") {
        auto base = base_cfg(sin_task(), sp, 5000, seed);
        // Minibatch noise plus a cosine-decayed lr is what lets the periodic
        // projections lock onto the target frequency; full-batch training
        // interpolates the grid and stalls on the extrapolation interval.
        base.lr = 3e-3;
        base.batch_size = 16;
        base.cosine_lr = true;
        auto cfgs = model_zoo(base, sp.d_h_main, {LayerKind::Fan, LayerKind::Mlp}, "");
        cfgs.front().model.dp_ratio = 0.5;  // fully periodic hidden stack
        cfgs.back().model.match_params =
            count_costs(cfgs.front().model.build(1, 1)).exact_params;
        groups.push_back({"sin", std::move(cfgs)});
    } else if (name == "fig3-grid") {
        for (const TaskSpec& t : {sin_task(), mod_task(5.0), sum_task()}) {
            auto base = base_cfg(t, sp, 2000, seed);
            groups.push_back({t.name(), model_zoo(base, sp.d_h_small,
                                                  {LayerKind::Fan, LayerKind::FanGated,
                                                   LayerKind::Mlp},
                                                  t.name())});
        }
    } else if (name == "fig4-losscurves") {
        auto base = base_cfg(complex_task(), sp, 6000, seed);
        base.eval_every = std::max(1, base.epochs / 120);
        groups.push_back({"complex_a", model_zoo(base, sp.d_h_small,
                                                 {LayerKind::Fan, LayerKind::FanGated,
                                                  LayerKind::Mlp},
                                                 "")});
    } else if (name == "fig6-fourier-baselines") {
        auto base = base_cfg(complex_task(), sp, 4000, seed);
        // Same minibatch recipe as fig1, applied uniformly to every model.
        base.lr = 3e-3;
        base.batch_size = 16;
        base.cosine_lr = true;
        groups.push_back({"complex_a", model_zoo(base, sp.d_h_small,
                                                 {LayerKind::Fan, LayerKind::Mlp,
                                                  LayerKind::FnnAct, LayerKind::Snake,
                                                  LayerKind::Fsnn},
                                                 "")});
    } else if (name == "fig8-extended") {
        for (const TaskSpec& t : {square_task(), complex_task(true), mod_task(3.0)}) {
            auto base = base_cfg(t, sp, 2000, seed);
            groups.push_back({t.name(), model_zoo(base, sp.d_h_small,
                                                  {LayerKind::Fan, LayerKind::Mlp}, t.name())});
        }
    } else if (name == "appD-snake") {
        for (const TaskSpec& t : {sin_task(), complex_task()}) {
            auto base = base_cfg(t, sp, 2000, seed);
            groups.push_back({t.name(), model_zoo(base, sp.d_h_small,
                                                  {LayerKind::Fan, LayerKind::Snake}, t.name())});
        }
    } else {
        throw ConfigError("unknown compare preset: " + name);
    }
    return groups;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ':' || c == '/' || c == ' ') c = '_';
    return s;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
    std::vector<PresetInfo> out;
    for (const PresetDef& p : kPresets) out.push_back({p.name, p.description});
    return out;
}

ExperimentConfig preset_base_config(const std::string& name, Scale scale, std::uint64_t seed) {
    const ScaleParams sp = scale_params(scale);
    if (name == "fig7-dp-sweep") {
        auto base = base_cfg(sin_task(), sp, 2000, seed);
        base.model = model_of(LayerKind::Fan, sp.d_h_small);
        return base;
    }
    if (name == "fig9-depth") {
        auto base = base_cfg(complex_task(), sp, 2000, seed);
        base.model = model_of(LayerKind::Fan, 64);
        return base;
    }
    if (name == "table1-accounting" || name == "table5-bench")
        throw ConfigError("preset '" + name + "' has no training config");
    return compare_groups(name, sp, seed).front().configs.front();
}

PresetOutcome run_preset(const std::string& name, Scale scale, std::uint64_t seed,
                         const std::string& out_root) {
    bool known = false;
    for (const PresetDef& p : kPresets) known = known || name == p.name;
    if (!known) throw ConfigError("unknown preset: " + name);

    const ScaleParams sp = scale_params(scale);
    PresetOutcome out;
    out.out_dir = out_root + "/" + name + "-s" + std::to_string(seed);
    std::filesystem::create_directories(out.out_dir);
    const auto file = [&](const std::string& rel) {
        out.files.push_back(rel);
        return out.out_dir + "/" + rel;
    };

    if (name == "table1-accounting") {
        std::ofstream f = open_out(file("accounting.csv"));
        f << "d_in,d_out,d_p,mlp_params_exact,mlp_params_table,fan_params_exact,"
             "fan_params_table,bias_gap,fan_matmul_flops_exact,fan_matmul_flops_table\n";
        for (std::size_t d : {16u, 64u, 256u, 1024u}) {
            LayerSpec mlp{LayerKind::Mlp, d, d};
            LayerSpec fan{LayerKind::Fan, d, d, d / 4};
            const CostReport cm = count_costs(mlp);
            const CostReport cf = count_costs(fan);
            const std::int64_t matmul_exact = 2 * static_cast<std::int64_t>(d) *
                                              static_cast<std::int64_t>(fan.d_p + fan.d_pbar());
            const std::int64_t matmul_table = cf.table_flops - cf.flops_nonlinear *
                                                                  static_cast<std::int64_t>(d);
            f << d << ',' << d << ',' << d / 4 << ',' << cm.exact_params << ','
              << cm.table_params << ',' << cf.exact_params << ',' << cf.table_params << ','
              << cf.table_params - cf.exact_params << ',' << matmul_exact << ','
              << matmul_table << '\n';
        }
        return out;
    }

    if (name == "table5-bench") {
        const std::vector<std::pair<std::size_t, std::size_t>> dims = {
            {1024, 1024}, {2048, 2048}, {4096, 4096}, {8192, 8192}};
        const auto rows = bench_runtime(dims);
        {
            std::ofstream f = open_out(file("bench.csv"));
            f << "d_in,d_out,fan_flops_exact,mlp_flops_exact,fan_flops_table,mlp_flops_table\n";
            for (const BenchRow& r : rows)
                f << r.d_in << ',' << r.d_out << ',' << r.fan_flops << ',' << r.mlp_flops << ','
                  << r.fan_table_flops << ',' << r.mlp_table_flops << '\n';
        }
        // Wall times are hardware noise; kept out of the CSV so bundles stay
        // reproducible byte-for-byte.
        std::ofstream t(out.out_dir + "/bench_timings.txt", std::ios::binary);
        t << "median forward wall time per layer (ms), batch 1\n";
        for (const BenchRow& r : rows)
            t << r.d_in << "x" << r.d_out << "  fan " << fmt6(r.fan_ms) << "  mlp "
              << fmt6(r.mlp_ms) << "\n";
        return out;
    }

    if (name == "fig7-dp-sweep") {
        auto base = preset_base_config(name, scale, seed);
        std::vector<RunResult> runs;
        const std::vector<double> ratios = {0.0, 0.125, 0.25, 0.375, 0.5};
        const auto rows = sweep_dp(base, ratios, &runs);
        {
            std::ofstream f = open_out(file("sweep.csv"));
            f << "ratio,d_p,params_exact,train_mse,id_mse,ood_mse,diverged\n";
            for (const SweepRow& r : rows)
                f << fmt9(r.ratio) << ',' << r.d_p << ',' << r.exact_params << ','
                  << fmt9(r.final_metrics.train_mse) << ',' << fmt9(r.final_metrics.id_mse)
                  << ',' << fmt9(r.final_metrics.ood_mse) << ',' << (r.diverged ? 1 : 0) << '\n';
        }
        emit_csv(runs, file("metrics.csv"));
        emit_svg_plot(runs, PlotKind::Sweep, file("sweep.svg"));
        for (const RunResult& r : runs) {
            std::ofstream f = open_out(file("resolved_" + sanitize(r.config.display_name()) +
                                            ".cfg"));
            f << describe(r.config);
            if (r.diverged) {
                out.ok = false;
                out.diverged.push_back(r.config.display_name());
            }
        }
        return out;
    }

    if (name == "fig9-depth") {
        auto base = preset_base_config(name, scale, seed);
        std::vector<RunResult> runs;
        const std::vector<int> depths = {1, 2, 4, 6};
        const auto rows = depth_study(base, depths, true, &runs);
        {
            std::ofstream f = open_out(file("depth.csv"));
            f << "depth,params_exact,best_train_mse,best_ood_mse,final_train_mse,"
                 "final_ood_mse,diverged\n";
            for (const DepthRow& r : rows)
                f << r.depth << ',' << r.exact_params << ',' << fmt9(r.best_train_mse) << ','
                  << fmt9(r.best_ood_mse) << ',' << fmt9(r.final_metrics.train_mse) << ','
                  << fmt9(r.final_metrics.ood_mse) << ',' << (r.diverged ? 1 : 0) << '\n';
        }
        emit_csv(runs, file("metrics.csv"));
        emit_svg_plot(runs, PlotKind::LossCurve, file("loss.svg"));
        for (const RunResult& r : runs) {
            std::ofstream f = open_out(file("resolved_" + sanitize(r.config.display_name()) +
                                            ".cfg"));
            f << describe(r.config);
            if (r.diverged) {
                out.ok = false;
                out.diverged.push_back(r.config.display_name());
            }
        }
        return out;
    }

    // Comparison presets.
    const auto groups = compare_groups(name, sp, seed);
    std::vector<RunResult> all_runs;
    std::ostringstream summary;
    for (const Group& g : groups) {
        ComparisonResult cr = compare(g.configs);
        summary << "task " << g.tag << " ranked by final ood_mse:\n";
        for (std::size_t idx : cr.ranking) {
            const RunResult& r = cr.runs[idx];
            summary << "  " << r.config.display_name() << "  ood_mse=";
            if (r.diverged)
                summary << "diverged(epoch " << r.diverged_epoch << ")";
            else
                summary << fmt9(r.final_record().ood_mse);
            summary << "  params=" << r.cost.exact_params << "\n";
        }
        emit_svg_plot(cr.runs, PlotKind::FitCurve, file("fit_" + sanitize(g.tag) + ".svg"));
        emit_svg_plot(cr.runs, PlotKind::LossCurve, file("loss_" + sanitize(g.tag) + ".svg"));
        for (RunResult& r : cr.runs) {
            std::ofstream f = open_out(file("resolved_" + sanitize(r.config.display_name()) +
                                            ".cfg"));
            f << describe(r.config);
            if (r.diverged) {
                out.ok = false;
                out.diverged.push_back(r.config.display_name());
            }
            all_runs.push_back(std::move(r));
        }
    }
    emit_csv(all_runs, file("metrics.csv"));
    std::ofstream s = open_out(file("summary.txt"));
    s << summary.str();
    return out;
}

}  // namespace fan
