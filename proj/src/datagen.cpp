#include "fan/datagen.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace fan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double positive_mod(double x, double k) {
    double r = std::fmod(x, k);
    if (r < 0.0) r += k;
    return r;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct Formula {
    const char* id;
    std::size_t dim;
    double (*eval)(std::span<const double>);
};

const Formula kFormulas[] = {
    {"exp_sin_2d", 2, [](std::span<const double> x) {
         return std::exp(std::sin(kPi * x[0]) + x[1] * x[1]);
     }},
    {"sin_prod_2d", 2, [](std::span<const double> x) {
         return std::sin(kPi * x[0]) * std::cos(kPi * x[1]);
     }},
    {"gauss_3d", 3, [](std::span<const double> x) {
         return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
     }},
};

const Formula& find_formula(const std::string& id) {
    for (const Formula& f : kFormulas)
        if (id == f.id) return f;
    throw ConfigError("unknown symbolic formula: " + id);
}

}  // namespace

std::size_t TaskSpec::input_dim() const {
    if (kind == Kind::Symbolic) return find_formula(formula_id).dim;
    return 1;
}

double TaskSpec::eval(double x) const {
    switch (kind) {
        case Kind::Sin:
            return std::sin(sin_freq * x);
        case Kind::SumSinusoids: {
            double s = 0.0;
            for (const Sinusoid& t : terms) s += t.amp * std::sin(t.freq * x + t.phase);
            return s;
        }
        case Kind::Mod:
            return positive_mod(x, modulus);
        case Kind::ComplexPeriodicA: {
            const double s = std::sin(kPi * x);
            return std::exp(s * s + std::cos(x) + positive_mod(x, 3.0) - 1.0);
        }
        case Kind::ComplexPeriodicB: {
            const double s = std::sin(kPi * x);
            return std::exp(s * s + std::cos(x) + positive_mod(x, 3.0)) - 1.0;
        }
        case Kind::SquareWave:
            return sign(std::sin(kTwoPi * x / square_period));
        case Kind::Symbolic:
            throw ContractError("symbolic task is multivariate; use the span overload");
    }
    return 0.0;
}

double TaskSpec::eval(std::span<const double> x) const {
    if (kind == Kind::Symbolic) return find_formula(formula_id).eval(x);
    if (x.size() != 1) throw ShapeError("scalar task got multivariate input");
    return eval(x[0]);
}

std::string TaskSpec::name() const {
    switch (kind) {
        case Kind::Sin: return "sin";
        case Kind::SumSinusoids: return "sum_sinusoids";
        case Kind::Mod: return "mod";
        case Kind::ComplexPeriodicA: return "complex_a";
        case Kind::ComplexPeriodicB: return "complex_b";
        case Kind::SquareWave: return "square";
        case Kind::Symbolic: return "symbolic:" + formula_id;
    }
    return "?";
}

void SplitSpec::validate() const {
    if (points_per_period <= 0.0) throw ConfigError("split: points_per_period must be positive");
    if (period_hint <= 0.0) throw ConfigError("split: period_hint must be positive");
    if (train_lo >= train_hi) throw ConfigError("split: empty train interval");
    if (test_lo > train_lo || train_hi > test_hi)
        throw ConfigError("split: train interval must lie inside test interval");
    if (test_lo == train_lo && train_hi == test_hi)
        throw ConfigError("split: OOD region is empty");
}

const char* to_string(Region r) {
    switch (r) {
        case Region::Train: return "train";
        case Region::IdTest: return "id_test";
        case Region::OodTest: return "ood_test";
    }
    return "?";
}

std::size_t Dataset::count(Region r) const {
    std::size_t n = 0;
    for (Region t : tags)
        if (t == r) ++n;
    return n;
}

std::pair<Tensor, Tensor> Dataset::select(Region r) const {
    const std::size_t n = count(r);
    Tensor x(inputs.rows(), n), y(targets.rows(), n);
    std::size_t c = 0;
    for (std::size_t j = 0; j < tags.size(); ++j) {
        if (tags[j] != r) continue;
        for (std::size_t i = 0; i < inputs.rows(); ++i) x(i, c) = inputs(i, j);
        for (std::size_t i = 0; i < targets.rows(); ++i) y(i, c) = targets(i, j);
        ++c;
    }
    return {std::move(x), std::move(y)};
}

Dataset generate_dataset(const TaskSpec& task, const SplitSpec& split) {
    split.validate();
    if (task.kind == TaskSpec::Kind::Symbolic)
        throw ConfigError("generate_dataset handles 1-D tasks; use symbolic_dataset");

    const double h = split.grid_step();
    const double tol = 1e-9 * h;
    const auto n_base =
        static_cast<std::size_t>(std::llround((split.test_hi - split.test_lo) / h));
    if (n_base == 0) throw ConfigError("split: grid has no points");

    const auto in_train = [&](double x) {
        return x >= split.train_lo - tol && x < split.train_hi - tol;
    };

    Dataset ds;
    ds.inputs = Tensor(1, 2 * n_base);
    ds.targets = Tensor(1, 2 * n_base);
    ds.tags.resize(2 * n_base);
    for (std::size_t i = 0; i < n_base; ++i) {
        const double x = split.test_lo + static_cast<double>(i) * h;
        ds.inputs(0, i) = x;
        ds.targets(0, i) = task.eval(x);
        ds.tags[i] = in_train(x) ? Region::Train : Region::OodTest;
    }
    for (std::size_t i = 0; i < n_base; ++i) {
        const double x = split.test_lo + (static_cast<double>(i) + 0.5) * h;
        ds.inputs(0, n_base + i) = x;
        ds.targets(0, n_base + i) = task.eval(x);
        ds.tags[n_base + i] = in_train(x) ? Region::IdTest : Region::OodTest;
    }
    return ds;
}

Dataset symbolic_dataset(const std::string& formula_id, std::uint64_t seed, std::size_t n_train,
                         std::size_t n_test) {
    const Formula& f = find_formula(formula_id);
    if (n_train == 0 || n_test == 0) throw ConfigError("symbolic_dataset: empty split");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    const std::size_t n = n_train + n_test;
    Dataset ds;
    ds.inputs = Tensor(f.dim, n);
    ds.targets = Tensor(1, n);
    ds.tags.resize(n);
    std::vector<double> point(f.dim);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < f.dim; ++i) {
            point[i] = dist(rng);
            ds.inputs(i, j) = point[i];
        }
        ds.targets(0, j) = f.eval(point);
        ds.tags[j] = j < n_train ? Region::Train : Region::IdTest;
    }
    return ds;
}

std::vector<std::string> symbolic_formula_ids() {
    std::vector<std::string> ids;
    for (const Formula& f : kFormulas) ids.emplace_back(f.id);
    return ids;
}

namespace {

double simpson(const std::function<double(double)>& f, double lo, double hi, std::size_t panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (hi - lo) / static_cast<double>(panels);
    double acc = f(lo) + f(hi);
    for (std::size_t i = 1; i < panels; ++i)
        acc += f(lo + static_cast<double>(i) * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

FourierCoefficients fourier_coefficients(const TaskSpec& task, double period, std::size_t n_terms,
                                         std::size_t panels) {
    if (n_terms < 1) throw ConfigError("fourier_coefficients: n_terms must be >= 1");
    if (period <= 0.0) throw ConfigError("fourier_coefficients: period must be positive");
    if (panels < 10000) panels = 10000;

    FourierCoefficients c;
    c.a.resize(n_terms + 1, 0.0);
    c.b.resize(n_terms + 1, 0.0);
    c.a[0] = simpson([&](double x) { return task.eval(x); }, 0.0, period, panels) / period;
    for (std::size_t n = 1; n <= n_terms; ++n) {
        const double w = kTwoPi * static_cast<double>(n) / period;
        c.a[n] = 2.0 / period *
                 simpson([&](double x) { return task.eval(x) * std::cos(w * x); }, 0.0, period, panels);
        c.b[n] = 2.0 / period *
                 simpson([&](double x) { return task.eval(x) * std::sin(w * x); }, 0.0, period, panels);
    }
    return c;
}

double fourier_series_eval(const FourierCoefficients& c, double period, double x) {
    double s = c.a[0];
    for (std::size_t n = 1; n < c.a.size(); ++n) {
        const double w = kTwoPi * static_cast<double>(n) / period;
        s += c.a[n] * std::cos(w * x) + c.b[n] * std::sin(w * x);
    }
    return s;
}

}  // namespace fan
