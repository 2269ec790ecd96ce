#include <doctest.h>

#include <cmath>
#include <random>

#include "fan/datagen.hpp"
#include "fan/layers.hpp"

using namespace fan;

namespace {

double std_gelu(double z) { return 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0))); }

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Tensor t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

}  // namespace

TEST_CASE("fan layer forward matches direct evaluation") {
    LayerSpec spec{LayerKind::Fan, 2, 7, 2};  // d_p = 2, d_pbar = 3
    std::mt19937_64 rng(5);
    Layer layer = build_layer(spec, rng);
    const Tensor x = random_tensor(2, 4, 6);
    Tape t;
    const Tensor& y = t.value(layer.forward(t, t.constant(x)));
    REQUIRE(y.rows() == 7);
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double proj = layer.w_p.value(i, 0) * x(0, j) + layer.w_p.value(i, 1) * x(1, j);
            CHECK(y(i, j) == doctest::Approx(std::cos(proj)).epsilon(1e-14));
            CHECK(y(2 + i, j) == doctest::Approx(std::sin(proj)).epsilon(1e-14));
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const double pre = layer.b_pbar.value(i, 0) +
                               layer.w_pbar.value(i, 0) * x(0, j) +
                               layer.w_pbar.value(i, 1) * x(1, j);
            CHECK(y(4 + i, j) == doctest::Approx(std_gelu(pre)).epsilon(1e-14));
        }
    }
}

TEST_CASE("fan layer with zero periodic projection reduces to an mlp embedding") {
    LayerSpec spec{LayerKind::Fan, 3, 10, 2};  // rows: 2 cos, 2 sin, 6 sigma
    std::mt19937_64 rng(7);
    Layer layer = build_layer(spec, rng);
    layer.w_p.value.fill(0.0);

    LayerSpec mspec{LayerKind::Mlp, 3, 6};
    Layer mlp;
    mlp.spec = mspec;
    mlp.w = Parameter(layer.w_pbar.value);
    mlp.b = Parameter(layer.b_pbar.value);

    std::mt19937_64 xrng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x(3, 1);
        for (std::size_t i = 0; i < 3; ++i) x(i, 0) = u(xrng);
        Tape t;
        const Tensor& y = t.value(layer.forward(t, t.constant(x)));
        Tape tm;
        const Tensor& ym = tm.value(mlp.forward(tm, tm.constant(x)));
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(y(i, 0) == 1.0);      // cos(0), bitwise
            CHECK(y(2 + i, 0) == 0.0);  // sin(0), bitwise
        }
        for (std::size_t i = 0; i < 6; ++i) CHECK(y(4 + i, 0) == ym(i, 0));
    }
}

TEST_CASE("gated fan layer interpolates between branches") {
    LayerSpec spec{LayerKind::FanGated, 1, 6, 2};
    std::mt19937_64 rng(9);
    Layer layer = build_layer(spec, rng);
    const Tensor x = Tensor::scalar(0.37);

    // raw_gate initialized to zero -> g = 0.5 exactly.
    CHECK(layer.raw_gate.value(0, 0) == 0.0);
    Tape t;
    const Tensor& y = t.value(layer.forward(t, t.constant(x)));

    LayerSpec uspec = spec;
    uspec.kind = LayerKind::Fan;
    Layer plain;
    plain.spec = uspec;
    plain.w_p = Parameter(layer.w_p.value);
    plain.w_pbar = Parameter(layer.w_pbar.value);
    plain.b_pbar = Parameter(layer.b_pbar.value);
    Tape tp;
    const Tensor& yp = tp.value(plain.forward(tp, tp.constant(x)));
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(y(i, 0) == doctest::Approx(0.5 * yp(i, 0)).epsilon(1e-14));
}

TEST_CASE("layer spec validation") {
    const LayerSpec bad_fan{LayerKind::Fan, 2, 4, 3};  // 2*3 > 4
    CHECK_THROWS_AS(bad_fan.validate(), ConfigError);
    const LayerSpec bad_fsnn{LayerKind::Fsnn, 1, 4, 0, 0};
    CHECK_THROWS_AS(bad_fsnn.validate(), ConfigError);
    LayerSpec res{LayerKind::Mlp, 2, 3};
    res.residual = true;
    CHECK_THROWS_AS(res.validate(), ConfigError);
    NetworkSpec ns;
    ns.layers = {LayerSpec{LayerKind::Fan, 1, 8, 2}};
    CHECK_THROWS_AS(ns.validate(), ConfigError);  // last layer must be linear
    ns.layers.push_back(LayerSpec{LayerKind::Linear, 9, 1});
    CHECK_THROWS_AS(ns.validate(), ConfigError);  // chain broken (8 vs 9)
}

TEST_CASE("stack_spec builds a valid chain with a linear head") {
    const NetworkSpec spec = stack_spec(LayerKind::Fan, 1, 64, 1, 3, 0.25);
    REQUIRE(spec.layers.size() == 4);
    CHECK(spec.layers[0].d_p == 16);
    CHECK(spec.layers[2].d_in == 64);
    CHECK(spec.layers.back().kind == LayerKind::Linear);
    CHECK_THROWS_AS(stack_spec(LayerKind::Fan, 1, 64, 1, 2, 0.75), ConfigError);
}

TEST_CASE("parameter and flop accounting over the dimension grid") {
    for (std::size_t d : {std::size_t{16}, std::size_t{64}, std::size_t{256}, std::size_t{1024}}) {
        const std::int64_t di = static_cast<std::int64_t>(d);
        const std::size_t dp = d / 4;
        const CostReport mlp = count_costs(LayerSpec{LayerKind::Mlp, d, d});
        CHECK(mlp.exact_params == di * di + di);  // closed-form count, exact
        const CostReport fan = count_costs(LayerSpec{LayerKind::Fan, d, d, dp});
        const std::int64_t formula = std::llround(
            (1.0 - static_cast<double>(dp) / static_cast<double>(d)) *
            static_cast<double>(di * di + di));
        CHECK(fan.table_params == formula);
        CHECK(formula - fan.exact_params == static_cast<std::int64_t>(dp));  // bias gap
        // matmul flops: the closed-form fraction is exact.
        const std::int64_t matmul_exact = 2 * di * static_cast<std::int64_t>(dp + (d - 2 * dp));
        CHECK(fan.table_flops - fan.flops_nonlinear * di == matmul_exact);
    }
}

TEST_CASE("frozen accounting values at 16x16") {
    const CostReport fan = count_costs(LayerSpec{LayerKind::Fan, 16, 16, 4});
    CHECK(fan.exact_params == 200);
    CHECK(fan.table_params == 204);
    const CostReport mlp = count_costs(LayerSpec{LayerKind::Mlp, 16, 16});
    CHECK(mlp.exact_params == 272);
}

TEST_CASE("gated layer adds exactly one parameter") {
    const CostReport fan = count_costs(LayerSpec{LayerKind::Fan, 8, 8, 2});
    const CostReport gated = count_costs(LayerSpec{LayerKind::FanGated, 8, 8, 2});
    CHECK(gated.exact_params == fan.exact_params + 1);
}

TEST_CASE("network accounting is the sum over layers") {
    const NetworkSpec spec = stack_spec(LayerKind::Fan, 1, 32, 1, 2);
    const CostReport total = count_costs(spec);
    std::int64_t p = 0, f = 0;
    for (const LayerSpec& l : spec.layers) {
        p += count_costs(l).exact_params;
        f += count_costs(l).exact_flops;
    }
    CHECK(total.exact_params == p);
    CHECK(total.exact_flops == f);
}

TEST_CASE("network parameter count matches materialized parameters") {
    const NetworkSpec spec = stack_spec(LayerKind::FanGated, 2, 24, 3, 2);
    Network net = build_network(spec, 123);
    std::int64_t scalars = 0;
    for (Parameter* p : net.parameters()) scalars += static_cast<std::int64_t>(p->value.size());
    CHECK(scalars == count_costs(spec).exact_params);
}

TEST_CASE("build_network is deterministic in the seed") {
    const NetworkSpec spec = stack_spec(LayerKind::Fan, 1, 16, 1, 2);
    Network a = build_network(spec, 42);
    Network b = build_network(spec, 42);
    Network c = build_network(spec, 43);
    auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    REQUIRE(pa.size() == pb.size());
    bool any_diff_seed = false;
    for (std::size_t k = 0; k < pa.size(); ++k)
        for (std::size_t i = 0; i < pa[k]->value.size(); ++i) {
            CHECK(pa[k]->value.data()[i] == pb[k]->value.data()[i]);
            any_diff_seed = any_diff_seed ||
                            pa[k]->value.data()[i] != pc[k]->value.data()[i];
        }
    CHECK(any_diff_seed);
}

TEST_CASE("initialization ranges: weights in +-1/sqrt(d_in), biases zero") {
    const NetworkSpec spec = stack_spec(LayerKind::Fan, 4, 16, 1, 1);
    Network net = build_network(spec, 77);
    const Layer& l0 = net.layers[0];
    const double bound = 1.0 / 2.0;  // 1/sqrt(4)
    for (std::size_t i = 0; i < l0.w_p.value.size(); ++i) {
        CHECK(std::abs(l0.w_p.value.data()[i]) <= bound);
    }
    for (std::size_t i = 0; i < l0.b_pbar.value.size(); ++i)
        CHECK(l0.b_pbar.value.data()[i] == 0.0);
}

TEST_CASE("residual layer adds its input") {
    LayerSpec base{LayerKind::Fan, 8, 8, 2};
    std::mt19937_64 rng(15);
    Layer plain = build_layer(base, rng);
    Layer res;
    res.spec = base;
    res.spec.residual = true;
    res.w_p = Parameter(plain.w_p.value);
    res.w_pbar = Parameter(plain.w_pbar.value);
    res.b_pbar = Parameter(plain.b_pbar.value);
    const Tensor x = random_tensor(8, 2, 16);
    Tape t1, t2;
    const Tensor& y1 = t1.value(plain.forward(t1, t1.constant(x)));
    const Tensor& y2 = t2.value(res.forward(t2, t2.constant(x)));
    for (std::size_t i = 0; i < y1.size(); ++i)
        CHECK(y2.data()[i] == doctest::Approx(y1.data()[i] + x.data()[i]).epsilon(1e-15));
}

TEST_CASE("fsnn layer seeded from series coefficients evaluates the series") {
    // f(x) = sin(2x): period pi, so the n=1 sine coefficient is 1.
    const double period = std::acos(-1.0);
    std::vector<double> a = {0.0, 0.0, 0.0};
    std::vector<double> b = {0.0, 1.0, 0.0};
    Layer fsnn = fsnn_from_series(a, b, period);
    for (double x = -7.0; x <= 7.0; x += 0.37) {
        Tape t;
        const Tensor& y = t.value(fsnn.forward(t, t.constant(Tensor::scalar(x))));
        CHECK(y(0, 0) == doctest::Approx(std::sin(2.0 * x)).epsilon(1e-12));
    }
}

TEST_CASE("fsnn exact representation of an arbitrary truncated series") {
    FourierCoefficients c;
    c.a = {0.3, -0.2, 0.05, 0.7};
    c.b = {0.0, 1.1, -0.4, 0.02};
    const double period = 5.0;
    Layer fsnn = fsnn_from_series(c.a, c.b, period);
    for (double x = -6.0; x <= 6.0; x += 0.51) {
        Tape t;
        const Tensor& y = t.value(fsnn.forward(t, t.constant(Tensor::scalar(x))));
        CHECK(y(0, 0) ==
              doctest::Approx(fourier_series_eval(c, period, x)).epsilon(1e-12));
    }
}

TEST_CASE("match_hidden_width parameter-matches baselines") {
    const std::int64_t target = count_costs(stack_spec(LayerKind::Fan, 1, 256, 1, 2)).exact_params;
    const std::size_t w = match_hidden_width(target, LayerKind::Mlp, 1, 1, 2);
    const auto params_at = [&](std::size_t h) {
        return count_costs(stack_spec(LayerKind::Mlp, 1, h, 1, 2)).exact_params;
    };
    const std::int64_t got = params_at(w);
    CHECK(std::abs(got - target) <= std::abs(params_at(w - 1) - target));
    CHECK(std::abs(got - target) <= std::abs(params_at(w + 1) - target));
    CHECK(std::abs(got - target) * 50 < target);  // within 2%
}
