#include "fan/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace fan {

namespace {
constexpr double kPiRunner = 3.14159265358979323846;
}

const char* to_string(OptimizerKind k) {
    return k == OptimizerKind::AdamW ? "adamw" : "sgdm";
}

NetworkSpec ModelSpec::build(std::size_t d_in, std::size_t d_out) const {
    std::size_t d_h = hidden;
    if (match_params > 0)
        d_h = match_hidden_width(match_params, kind, d_in, d_out, n_hidden, act);
    return stack_spec(kind, d_in, d_h, d_out, n_hidden, dp_ratio, act, residual, fsnn_terms);
}

void ExperimentConfig::validate() const {
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (eval_every < 1) throw ConfigError("config: eval_every must be >= 1");
    if (lr <= 0.0) throw ConfigError("config: lr must be positive");
    if (task.kind != TaskSpec::Kind::Symbolic) split.validate();
    model.build(task.input_dim(), 1).validate();
}

std::string describe(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "name = " << cfg.display_name() << "\n";
    os << "model = " << to_string(cfg.model.kind) << "\n";
    os << "layers = " << cfg.model.n_hidden + 1 << "\n";
    os << "hidden = " << cfg.model.hidden << "\n";
    os << "dp_ratio = " << cfg.model.dp_ratio << "\n";
    os << "activation = " << to_string(cfg.model.act) << "\n";
    os << "residual = " << (cfg.model.residual ? "true" : "false") << "\n";
    if (cfg.model.fsnn_terms) os << "fsnn_terms = " << cfg.model.fsnn_terms << "\n";
    if (cfg.model.match_params) os << "match_params = " << cfg.model.match_params << "\n";
    os << "task = " << cfg.task.name() << "\n";
    if (cfg.task.kind == TaskSpec::Kind::Sin) os << "sin_freq = " << cfg.task.sin_freq << "\n";
    if (cfg.task.kind == TaskSpec::Kind::Mod) os << "modulus = " << cfg.task.modulus << "\n";
    if (cfg.task.kind == TaskSpec::Kind::SquareWave)
        os << "square_period = " << cfg.task.square_period << "\n";
    if (cfg.task.kind == TaskSpec::Kind::SumSinusoids)
        for (const Sinusoid& s : cfg.task.terms)
            os << "sinusoid = " << s.amp << "," << s.freq << "," << s.phase << "\n";
    if (cfg.task.kind == TaskSpec::Kind::Symbolic) {
        os << "symbolic_train = " << cfg.symbolic_train << "\n";
        os << "symbolic_test = " << cfg.symbolic_test << "\n";
    } else {
        os << "train_lo = " << cfg.split.train_lo << "\n";
        os << "train_hi = " << cfg.split.train_hi << "\n";
        os << "test_lo = " << cfg.split.test_lo << "\n";
        os << "test_hi = " << cfg.split.test_hi << "\n";
        os << "points_per_period = " << cfg.split.points_per_period << "\n";
        os << "period_hint = " << cfg.split.period_hint << "\n";
    }
    os << "optimizer = " << to_string(cfg.opt) << "\n";
    os << "lr = " << cfg.lr << "\n";
    os << "weight_decay = " << cfg.weight_decay << "\n";
    os << "momentum = " << cfg.momentum << "\n";
    os << "epochs = " << cfg.epochs << "\n";
    os << "eval_every = " << cfg.eval_every << "\n";
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "cosine_lr = " << (cfg.cosine_lr ? "true" : "false") << "\n";
    os << "seed = " << cfg.seed << "\n";
    return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a
    for (char c : describe(cfg)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

Dataset make_dataset(const ExperimentConfig& cfg) {
    if (cfg.task.kind == TaskSpec::Kind::Symbolic)
        return symbolic_dataset(cfg.task.formula_id, cfg.seed, cfg.symbolic_train,
                                cfg.symbolic_test);
    return generate_dataset(cfg.task, cfg.split);
}

struct RegionStats {
    double mse[3] = {0, 0, 0};
    double mae[3] = {0, 0, 0};
};

RegionStats evaluate_all(Network& net, const Dataset& ds) {
    const Tensor pred = net.forward_value(ds.inputs);
    RegionStats st;
    double se[3] = {0, 0, 0}, ae[3] = {0, 0, 0};
    std::size_t cnt[3] = {0, 0, 0};
    for (std::size_t j = 0; j < ds.tags.size(); ++j) {
        const auto r = static_cast<std::size_t>(ds.tags[j]);
        for (std::size_t i = 0; i < pred.rows(); ++i) {
            const double d = pred(i, j) - ds.targets(i, j);
            se[r] += d * d;
            ae[r] += std::abs(d);
        }
        ++cnt[r];
    }
    for (int r = 0; r < 3; ++r) {
        const double n = static_cast<double>(cnt[r] * pred.rows());
        if (cnt[r]) {
            st.mse[r] = se[r] / n;
            st.mae[r] = ae[r] / n;
        }
    }
    return st;
}

}  // namespace

std::pair<double, double> evaluate(Network& net, const Dataset& ds, Region region) {
    if (ds.count(region) == 0)
        throw ContractError(std::string("evaluate: empty region ") + to_string(region));
    auto [x, y] = ds.select(region);
    const Tensor pred = net.forward_value(x);
    double se = 0, ae = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - y.data()[i];
        se += d * d;
        ae += std::abs(d);
    }
    const double n = static_cast<double>(pred.size());
    return {se / n, ae / n};
}

RunResult train(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    RunResult res;
    res.config = cfg;
    res.hash = config_hash(cfg);

    const Dataset ds = make_dataset(cfg);
    const NetworkSpec nspec = cfg.model.build(ds.inputs.rows(), ds.targets.rows());
    res.net = build_network(nspec, cfg.seed);
    res.cost = count_costs(nspec);
    auto params = res.net.parameters();

    std::unique_ptr<AdamW> adamw;
    std::unique_ptr<Sgdm> sgdm;
    if (cfg.opt == OptimizerKind::AdamW)
        adamw = std::make_unique<AdamW>(params, AdamW::Options{cfg.lr, 0.9, 0.999, 1e-8,
                                                               cfg.weight_decay});
    else
        sgdm = std::make_unique<Sgdm>(params, cfg.lr, cfg.momentum);

    auto [x_train, y_train] = ds.select(Region::Train);

    auto record = [&](int epoch) {
        const RegionStats st = evaluate_all(res.net, ds);
        MetricsRecord m;
        m.epoch = epoch;
        m.train_mse = st.mse[0];
        m.id_mse = st.mse[1];
        m.ood_mse = st.mse[2];
        m.train_mae = st.mae[0];
        m.id_mae = st.mae[1];
        m.ood_mae = st.mae[2];
        m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t_start)
                        .count();
        res.history.push_back(m);
    };

    const std::size_t n_train = x_train.cols();
    const std::size_t batch =
        (cfg.batch_size == 0 || cfg.batch_size >= n_train) ? n_train : cfg.batch_size;
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

    auto step_batch = [&](const Tensor& xb, const Tensor& yb) {
        Tape tape;
        Var pred = res.net.forward(tape, tape.constant(xb));
        Var loss = tape.mse_loss(pred, tape.constant(yb));
        zero_grad(params);
        tape.backward(loss);
        if (adamw)
            adamw->step();
        else
            sgdm->step();
    };

    record(0);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.cosine_lr) {
            const double t = static_cast<double>(epoch - 1) / static_cast<double>(cfg.epochs);
            const double lr = cfg.lr * 0.5 * (1.0 + std::cos(kPiRunner * t));
            if (adamw)
                adamw->set_lr(lr);
            else
                sgdm->set_lr(lr);
        }
        try {
            if (batch == n_train) {
                step_batch(x_train, y_train);
            } else {
                std::shuffle(order.begin(), order.end(), shuffle_rng);
                for (std::size_t s = 0; s < n_train; s += batch) {
                    const std::size_t m = std::min(batch, n_train - s);
                    Tensor xb(x_train.rows(), m), yb(y_train.rows(), m);
                    for (std::size_t j = 0; j < m; ++j) {
                        for (std::size_t i = 0; i < x_train.rows(); ++i)
                            xb(i, j) = x_train(i, order[s + j]);
                        for (std::size_t i = 0; i < y_train.rows(); ++i)
                            yb(i, j) = y_train(i, order[s + j]);
                    }
                    step_batch(xb, yb);
                }
            }
        } catch (const NumericError&) {
            res.diverged = true;
            res.diverged_epoch = epoch;
            break;
        }
        if (epoch % cfg.eval_every == 0) {
            try {
                record(epoch);
            } catch (const NumericError&) {
                res.diverged = true;
                res.diverged_epoch = epoch;
                res.history.resize(std::max<std::size_t>(1, res.history.size()));
                break;
            }
        }
    }
    return res;
}

namespace {

std::vector<RunResult> run_all(const std::vector<ExperimentConfig>& configs) {
    std::vector<std::future<RunResult>> futs;
    futs.reserve(configs.size());
    for (const ExperimentConfig& c : configs)
        futs.push_back(std::async(std::launch::async, [c] { return train(c); }));
    std::vector<RunResult> runs;
    runs.reserve(configs.size());
    for (auto& f : futs) runs.push_back(f.get());
    return runs;
}

double final_ood(const RunResult& r) {
    if (r.diverged) return std::numeric_limits<double>::infinity();
    return r.final_record().ood_mse;
}

}  // namespace

ComparisonResult compare(const std::vector<ExperimentConfig>& configs) {
    if (configs.empty()) throw ConfigError("compare: no configs");
    const std::string task0 = configs.front().task.name();
    std::ostringstream s0;
    s0 << configs.front().split.train_lo << "," << configs.front().split.train_hi << ","
       << configs.front().split.test_lo << "," << configs.front().split.test_hi;
    for (const ExperimentConfig& c : configs) {
        std::ostringstream si;
        si << c.split.train_lo << "," << c.split.train_hi << "," << c.split.test_lo << ","
           << c.split.test_hi;
        if (c.task.name() != task0 || si.str() != s0.str())
            throw ConfigError("compare: configs must share task and split");
    }

    ComparisonResult res;
    res.runs = run_all(configs);
    res.ranking.resize(res.runs.size());
    for (std::size_t i = 0; i < res.ranking.size(); ++i) res.ranking[i] = i;
    std::stable_sort(res.ranking.begin(), res.ranking.end(), [&](std::size_t a, std::size_t b) {
        return final_ood(res.runs[a]) < final_ood(res.runs[b]);
    });
    return res;
}

std::vector<SweepRow> sweep_dp(const ExperimentConfig& base, const std::vector<double>& ratios,
                               std::vector<RunResult>* runs_out) {
    std::vector<ExperimentConfig> configs;
    for (double r : ratios) {
        if (r < 0.0 || r > 0.5) throw ConfigError("sweep_dp: ratio outside [0, 0.5]");
        ExperimentConfig c = base;
        c.model.dp_ratio = r;
        std::ostringstream name;
        name << base.model.label() << "_dp" << r;
        c.name = name.str();
        configs.push_back(std::move(c));
    }
    std::vector<RunResult> runs = run_all(configs);

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        SweepRow row;
        row.ratio = ratios[i];
        row.d_p = static_cast<std::size_t>(ratios[i] * static_cast<double>(base.model.hidden));
        row.final_metrics = runs[i].final_record();
        row.exact_params = runs[i].cost.exact_params;
        row.diverged = runs[i].diverged;
        rows.push_back(row);
    }
    if (runs_out) *runs_out = std::move(runs);
    return rows;
}

std::vector<DepthRow> depth_study(const ExperimentConfig& base, const std::vector<int>& depths,
                                  bool residual, std::vector<RunResult>* runs_out) {
    std::vector<ExperimentConfig> configs;
    for (int d : depths) {
        if (d < 1) throw ConfigError("depth_study: depth must be >= 1");
        ExperimentConfig c = base;
        c.model.n_hidden = d;
        c.model.residual = residual;
        c.name = base.model.label() + "_depth" + std::to_string(d);
        configs.push_back(std::move(c));
    }
    std::vector<RunResult> runs = run_all(configs);

    std::vector<DepthRow> rows;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        DepthRow row;
        row.depth = depths[i];
        row.best_train_mse = std::numeric_limits<double>::infinity();
        row.best_ood_mse = std::numeric_limits<double>::infinity();
        for (const MetricsRecord& m : runs[i].history) {
            row.best_train_mse = std::min(row.best_train_mse, m.train_mse);
            row.best_ood_mse = std::min(row.best_ood_mse, m.ood_mse);
        }
        row.final_metrics = runs[i].final_record();
        row.exact_params = runs[i].cost.exact_params;
        row.diverged = runs[i].diverged;
        rows.push_back(row);
    }
    if (runs_out) *runs_out = std::move(runs);
    return rows;
}

std::vector<BenchRow> bench_runtime(const std::vector<std::pair<std::size_t, std::size_t>>& dims,
                                    int passes) {
    if (passes < 100) passes = 100;
    std::vector<BenchRow> rows;
    for (auto [d_in, d_out] : dims) {
        if (d_in == 0 || d_out == 0) throw ConfigError("bench_runtime: zero dimension");
        BenchRow row;
        row.d_in = d_in;
        row.d_out = d_out;

        LayerSpec fan_spec{LayerKind::Fan, d_in, d_out, d_out / 4};
        LayerSpec mlp_spec{LayerKind::Mlp, d_in, d_out};
        const CostReport cf = count_costs(fan_spec);
        const CostReport cm = count_costs(mlp_spec);
        row.fan_flops = cf.exact_flops;
        row.mlp_flops = cm.exact_flops;
        row.fan_table_flops = cf.table_flops;
        row.mlp_table_flops = cm.table_flops;

        const Tensor x(d_in, 1, 0.5);
        auto time_layer = [&](const LayerSpec& spec) {
            std::mt19937_64 rng(7);
            Layer layer = build_layer(spec, rng);
            std::vector<double> samples;
            samples.reserve(passes);
            for (int p = 0; p < passes; ++p) {
                const auto t0 = std::chrono::steady_clock::now();
                Tape tape;
                layer.forward(tape, tape.constant(x));
                const auto t1 = std::chrono::steady_clock::now();
                samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            std::sort(samples.begin(), samples.end());
            return samples[samples.size() / 2];
        };
        row.fan_ms = time_layer(fan_spec);
        row.mlp_ms = time_layer(mlp_spec);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fan
