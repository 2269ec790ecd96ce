// End-to-end acceptance harness. Each numbered check prints exactly one
// "PASS"/"FAIL" line; the process exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fan/report.hpp"

using namespace fan;

namespace {

int failures = 0;

void report(int idx, const char* title, bool ok, const std::string& detail) {
    std::printf("%s  %2d. %-34s %s\n", ok ? "PASS" : "FAIL", idx, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------

void check_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr double kEps = 1e-5;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> dim(3, 32);
    double worst = 0.0;
    std::string worst_kind = "-";
    for (LayerKind kind : {LayerKind::Fan, LayerKind::FanGated, LayerKind::Mlp, LayerKind::Fsnn,
                           LayerKind::FnnAct, LayerKind::Snake, LayerKind::Linear}) {
        const std::size_t d_in = dim(rng);
        std::size_t d_out = dim(rng);
        LayerSpec spec;
        spec.kind = kind;
        spec.d_in = d_in;
        spec.d_out = d_out;
        if (kind == LayerKind::Fan || kind == LayerKind::FanGated) spec.d_p = d_out / 3;
        if (kind == LayerKind::Fsnn) spec.fourier_terms = 5;
        Layer layer = build_layer(spec, rng);

        Tensor x(d_in, 4), y(d_out, 4);
        for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = u(rng);

        const auto loss_value = [&] {
            Tape t;
            return t.value(t.mse_loss(layer.forward(t, t.constant(x)), t.constant(y)))(0, 0);
        };
        auto params = layer.params();
        zero_grad(params);
        {
            Tape t;
            t.backward(t.mse_loss(layer.forward(t, t.constant(x)), t.constant(y)));
        }
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
                const double err = std::abs(an - fd) / std::max(1.0, std::abs(an));
                if (err > worst) {
                    worst = err;
                    worst_kind = to_string(kind);
                }
            }
    }
    const double secs = elapsed_s(t0);
    report(1, "gradient correctness", worst < 1e-4 && secs < 10.0,
           "max_rel_err " + fmt(worst) + " (" + worst_kind + "), " + fmt(secs) + " s");
}

void check_accounting() {
    bool ok = true;
    std::string detail;
    for (std::size_t d : {std::size_t{16}, std::size_t{64}, std::size_t{256}, std::size_t{1024}}) {
        const std::int64_t di = static_cast<std::int64_t>(d);
        const std::size_t dp = d / 4;
        const CostReport mlp = count_costs(LayerSpec{LayerKind::Mlp, d, d});
        const CostReport fan = count_costs(LayerSpec{LayerKind::Fan, d, d, dp});
        const std::int64_t mlp_formula = di * di + di;
        const std::int64_t fan_formula = std::llround(
            0.75 * static_cast<double>(di * di + di));
        const std::int64_t fan_matmul_exact =
            2 * di * static_cast<std::int64_t>(dp + d - 2 * dp);
        const std::int64_t fan_matmul_formula = std::llround(0.75 * 2.0 * di * di);
        ok = ok && mlp.exact_params == mlp_formula;
        ok = ok && fan_matmul_exact == fan_matmul_formula;
        ok = ok && fan_formula - fan.exact_params == static_cast<std::int64_t>(dp);
        if (d == 16)
            detail = "fan@16: exact " + std::to_string(fan.exact_params) + " vs formula " +
                     std::to_string(fan_formula);
    }
    report(2, "parameter/flop accounting", ok, detail);
}

void check_mlp_embedding() {
    LayerSpec spec{LayerKind::Fan, 3, 12, 3};  // 3 cos, 3 sin, 6 sigma rows
    std::mt19937_64 rng(7);
    Layer layer = build_layer(spec, rng);
    layer.w_p.value.fill(0.0);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        Tensor x(3, 1);
        for (std::size_t i = 0; i < 3; ++i) x(i, 0) = u(rng);
        Tape t;
        const Tensor& y = t.value(layer.forward(t, t.constant(x)));
        Tape tm;
        Var pre = tm.add_bias(tm.matmul(tm.leaf(layer.w_pbar), tm.constant(x)),
                              tm.leaf(layer.b_pbar));
        const Tensor& sig = tm.value(tm.gelu_elem(pre));
        for (std::size_t i = 0; i < 3; ++i)
            ok = ok && y(i, 0) == 1.0 && y(3 + i, 0) == 0.0;  // bitwise
        for (std::size_t i = 0; i < 6; ++i) ok = ok && y(6 + i, 0) == sig(i, 0);
    }
    report(3, "mlp embedding at w_p = 0", ok, ok ? "bitwise over 100 inputs" : "mismatch");
}

void check_fsnn_oracle() {
    TaskSpec task;
    task.kind = TaskSpec::Kind::SquareWave;
    const double period = task.square_period;
    const FourierCoefficients c = fourier_coefficients(task, period, 16);
    Layer fsnn = fsnn_from_series(c.a, c.b, period);
    double mse = 0.0;
    const int pts = 1000;
    for (int i = 0; i < pts; ++i) {
        const double x = -period + 2.0 * period * static_cast<double>(i) / pts;
        Tape t;
        const double net = t.value(fsnn.forward(t, t.constant(Tensor::scalar(x))))(0, 0);
        const double direct = fourier_series_eval(c, period, x);
        mse += (net - direct) * (net - direct);
    }
    mse /= pts;
    report(4, "fsnn fourier-series oracle", mse < 1e-8, "mse vs direct sum " + fmt(mse));
}

// Presets executed once; their bundles back several checks below.
std::map<std::string, PresetOutcome> run_all_presets(const std::string& root) {
    std::map<std::string, PresetOutcome> out;
    for (const PresetInfo& p : list_presets())
        out[p.name] = run_preset(p.name, Scale::Desk, 42, root);
    return out;
}

struct CsvRow {
    std::string model;
    int epoch = 0;
    double train_mse = 0, ood_mse = 0;
};

std::vector<CsvRow> parse_metrics(const std::string& path) {
    std::vector<CsvRow> rows;
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string field;
        CsvRow row;
        std::getline(is, field, ',');  // run index
        std::getline(is, row.model, ',');
        std::getline(is, field, ',');
        row.epoch = std::stoi(field);
        std::getline(is, field, ',');
        row.train_mse = std::stod(field);
        std::getline(is, field, ',');  // id_mse
        std::getline(is, field, ',');
        row.ood_mse = std::stod(field);
        rows.push_back(row);
    }
    return rows;
}

std::map<std::string, std::vector<CsvRow>> by_model(const std::vector<CsvRow>& rows) {
    std::map<std::string, std::vector<CsvRow>> m;
    for (const CsvRow& r : rows) m[r.model].push_back(r);
    return m;
}

void check_fig1(const std::string& root, double secs) {
    const auto rows = by_model(parse_metrics(root + "/fig1-sin-s42/metrics.csv"));
    bool ok = rows.count("fan") && rows.count("mlp");
    double fan_ood = 1e300, mlp_ood = 1e300;
    if (ok) {
        fan_ood = rows.at("fan").back().ood_mse;
        mlp_ood = rows.at("mlp").back().ood_mse;
        ok = fan_ood < 0.1 * mlp_ood && fan_ood < 0.05 && secs <= 600.0;
    }
    report(5, "fig1 ood superiority", ok,
           "fan " + fmt(fan_ood) + " vs mlp " + fmt(mlp_ood) + ", " + fmt(secs) + " s");
}

void check_fig6(const std::string& root, double secs) {
    const auto rows = by_model(parse_metrics(root + "/fig6-fourier-baselines-s42/metrics.csv"));
    bool ok = true;
    double fan_ood = 1e300;
    std::string detail;
    if (!rows.count("fan")) {
        ok = false;
        detail = "fan missing";
    } else {
        fan_ood = rows.at("fan").back().ood_mse;
        for (const char* rival : {"mlp", "fnn", "snake"}) {
            if (!rows.count(rival)) {
                ok = false;
                continue;
            }
            const double r = rows.at(rival).back().ood_mse;
            ok = ok && fan_ood < r;
            detail += std::string(rival) + " " + fmt(r) + " ";
        }
        detail = "fan " + fmt(fan_ood) + " vs " + detail;
        ok = ok && secs <= 1200.0;
    }
    report(6, "fig6 complex-periodic ordering", ok, detail + fmt(secs) + " s");
}

void check_training_dynamics(const std::string& root) {
    const auto rows = by_model(parse_metrics(root + "/fig6-fourier-baselines-s42/metrics.csv"));
    bool ok = rows.count("fan");
    double ratio = 0.0;
    if (ok) {
        const auto& fan = rows.at("fan");
        ratio = fan.front().train_mse / std::max(fan.back().train_mse, 1e-300);
        ok = ratio >= 100.0;
    }
    // Divergence flagging is covered by the runner: a diverged run keeps its
    // last finite records and sets the flag (exercised in the unit suite); here
    // we assert all persisted metric values are finite.
    bool finite = true;
    for (const auto& [model, history] : rows)
        for (const CsvRow& r : history)
            finite = finite && std::isfinite(r.train_mse) && std::isfinite(r.ood_mse);
    report(7, "training dynamics", ok && finite,
           "fan train-mse drop " + fmt(ratio) + "x, all persisted losses finite");
}

void check_dp_sweep(const std::string& root) {
    const std::string csv = root + "/fig7-dp-sweep-s42/sweep.csv";
    bool ok = std::filesystem::exists(csv);
    double ood0 = 0.0, ood25 = 0.0;
    if (ok) {
        std::ifstream f(csv);
        std::string line;
        std::getline(f, line);
        int found = 0;
        while (std::getline(f, line)) {
            std::istringstream is(line);
            std::string ratio_s, dp_s, params_s, train_s, id_s, ood_s;
            std::getline(is, ratio_s, ',');
            std::getline(is, dp_s, ',');
            std::getline(is, params_s, ',');
            std::getline(is, train_s, ',');
            std::getline(is, id_s, ',');
            std::getline(is, ood_s, ',');
            const double ratio = std::stod(ratio_s);
            if (ratio == 0.0) {
                ood0 = std::stod(ood_s);
                ++found;
            }
            if (ratio == 0.25) {
                ood25 = std::stod(ood_s);
                ++found;
            }
        }
        ok = found == 2 && ood25 < ood0;
    }
    report(8, "dp-ratio sweep shape", ok,
           "ood at ratio 0: " + fmt(ood0) + ", at 0.25: " + fmt(ood25));
}

void check_determinism(const std::string& root_a, const std::string& root_b,
                       const std::map<std::string, PresetOutcome>& first,
                       const std::map<std::string, PresetOutcome>& second) {
    bool ok = true;
    std::string bad;
    for (const auto& [name, outcome] : first) {
        const PresetOutcome& other = second.at(name);
        for (const std::string& rel : outcome.files) {
            if (rel.find(".csv") == std::string::npos && rel.find(".svg") == std::string::npos)
                continue;
            if (slurp(outcome.out_dir + "/" + rel) != slurp(other.out_dir + "/" + rel)) {
                ok = false;
                bad = name + "/" + rel;
            }
        }
    }
    (void)root_a;
    (void)root_b;
    report(9, "preset determinism", ok,
           ok ? "all csv/svg byte-identical across re-runs" : "differs: " + bad);
}

void check_adamw_quadratic() {
    Parameter p(Tensor::scalar(10.0));
    AdamW::Options opt;
    opt.lr = 1e-2;
    opt.weight_decay = 0.0;
    AdamW adam({&p}, opt);
    int steps = 0;
    for (; steps < 5000; ++steps) {
        p.grad = Tensor::scalar(2.0 * (p.value(0, 0) - 3.0));
        adam.step();
        if (std::abs(p.value(0, 0) - 3.0) < 1e-3) break;
    }
    report(10, "adamw quadratic convergence", steps < 5000,
           "|p - p*| < 1e-3 after " + std::to_string(steps + 1) + " steps");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    check_gradients();
    check_accounting();
    check_mlp_embedding();
    check_fsnn_oracle();

    const std::string root_a = "acceptance_out/pass1";
    const std::string root_b = "acceptance_out/pass2";
    std::filesystem::create_directories(root_a);
    std::filesystem::create_directories(root_b);

    std::map<std::string, PresetOutcome> first, second;
    std::map<std::string, double> secs;
    for (const PresetInfo& p : list_presets()) {
        const auto t0 = std::chrono::steady_clock::now();
        first[p.name] = run_preset(p.name, Scale::Desk, 42, root_a);
        secs[p.name] = elapsed_s(t0);
        std::printf("  .. preset %s: %.1f s\n", p.name.c_str(), secs[p.name]);
        std::fflush(stdout);
    }
    for (const PresetInfo& p : list_presets())
        second[p.name] = run_preset(p.name, Scale::Desk, 42, root_b);

    check_fig1(root_a, secs["fig1-sin"]);
    check_fig6(root_a, secs["fig6-fourier-baselines"]);
    check_training_dynamics(root_a);
    check_dp_sweep(root_a);
    check_determinism(root_a, root_b, first, second);
    check_adamw_quadratic();

    std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures,
                failures == 1 ? "" : "s");
    return failures;
}
