#include <doctest.h>

#include <cmath>
#include <random>

#include "fan/tape.hpp"

using namespace fan;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    Tensor t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

}  // namespace

TEST_CASE("tensor basics") {
    Tensor t = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t(1, 2) == 6);
    CHECK(t.all_finite());
    t(0, 0) = std::nan("");
    CHECK_FALSE(t.all_finite());

    Tensor id = Tensor::identity(3);
    CHECK(id(0, 0) == 1);
    CHECK(id(0, 1) == 0);
    CHECK(Tensor::scalar(7.0)(0, 0) == 7.0);
}

TEST_CASE("matmul forward matches hand computation") {
    Tape t;
    Var a = t.constant(Tensor::from_rows({{1, 2}, {3, 4}}));
    Var b = t.constant(Tensor::from_rows({{5, 6}, {7, 8}}));
    const Tensor& c = t.value(t.matmul(a, b));
    CHECK(c(0, 0) == 19);
    CHECK(c(0, 1) == 22);
    CHECK(c(1, 0) == 43);
    CHECK(c(1, 1) == 50);
}

TEST_CASE("matmul rejects shape mismatch") {
    Tape t;
    Var a = t.constant(Tensor(2, 3));
    Var b = t.constant(Tensor(2, 3));
    CHECK_THROWS_AS(t.matmul(a, b), ShapeError);
    CHECK_THROWS_AS(t.add(a, t.constant(Tensor(3, 2))), ShapeError);
}

TEST_CASE("elementwise gradients match finite differences") {
    const Tensor x = random_tensor(3, 4, 11);
    const auto check = [&](const std::function<Var(Tape&, Var)>& f) {
        CHECK(gradcheck(f, x) < 1e-6);
    };
    check([](Tape& t, Var v) { return t.sum(t.cos_elem(v)); });
    check([](Tape& t, Var v) { return t.sum(t.sin_elem(v)); });
    check([](Tape& t, Var v) { return t.sum(t.gelu_elem(v)); });
    check([](Tape& t, Var v) { return t.sum(t.sigmoid_elem(v)); });
    check([](Tape& t, Var v) { return t.sum(t.snake_elem(v)); });
    check([](Tape& t, Var v) { return t.sum(t.scale(v, -2.5)); });
    check([](Tape& t, Var v) { return t.sum(t.one_minus(v)); });
    // relu away from the kink
    Tensor shifted = x;
    for (std::size_t i = 0; i < shifted.size(); ++i)
        shifted.data()[i] += shifted.data()[i] >= 0 ? 0.5 : -0.5;
    CHECK(gradcheck([](Tape& t, Var v) { return t.sum(t.relu_elem(v)); }, shifted) < 1e-6);
}

TEST_CASE("cos derivative at a point") {
    Tensor x = Tensor::scalar(0.7);
    const double err =
        gradcheck([](Tape& t, Var v) { return t.sum(t.cos_elem(v)); }, x);
    CHECK(err < 1e-6);
    Tape t;
    Var v = t.constant(x);
    Var loss = t.sum(t.cos_elem(v));
    t.backward(loss);
    CHECK(t.grad(v)(0, 0) == doctest::Approx(-std::sin(0.7)).epsilon(1e-12));
}

TEST_CASE("gelu exact values and derivative") {
    Tape t;
    Var x = t.constant(Tensor::from_rows({{0.0, 1.0, -1.0}}));
    const Tensor& y = t.value(t.gelu_elem(x));
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
    CHECK(y(0, 2) == doctest::Approx(-0.15865525393145705).epsilon(1e-12));
    CHECK(gradcheck([](Tape& tt, Var v) { return tt.sum(tt.gelu_elem(v)); },
                    random_tensor(2, 5, 3)) < 1e-6);
}

TEST_CASE("snake value and derivative") {
    Tape t;
    const double z = -1.3;
    Var x = t.constant(Tensor::scalar(z));
    CHECK(t.value(t.snake_elem(x))(0, 0) ==
          doctest::Approx(z + std::sin(z) * std::sin(z)).epsilon(1e-12));
    CHECK(gradcheck([](Tape& tt, Var v) { return tt.sum(tt.snake_elem(v)); },
                    Tensor::scalar(z)) < 1e-6);
}

TEST_CASE("composite graph gradcheck") {
    const Tensor x = random_tensor(4, 3, 21);
    const Tensor target = random_tensor(2, 3, 22);
    const Tensor w = random_tensor(2, 4, 23);
    const double err = gradcheck(
        [&](Tape& t, Var v) {
            Var h = t.matmul(t.constant(w), t.sin_elem(v));
            return t.mse_loss(h, t.constant(target));
        },
        x);
    CHECK(err < 1e-6);
}

TEST_CASE("corrupted derivative rule is caught by gradcheck") {
    // Negative control: a deliberately wrong df must produce a large error.
    const Tensor x = random_tensor(2, 3, 31);
    const double err = gradcheck(
        [](Tape& t, Var v) {
            Var y = t.map_unary(
                v, [](double z) { return std::cos(z); },
                [](double z) { return std::sin(z); });  // sign error
            return t.sum(y);
        },
        x);
    CHECK(err > 1e-2);
}

TEST_CASE("concat and slice are inverse; concat backward routes gradients") {
    const Tensor x = random_tensor(3, 4, 41);
    Tape t;
    Var v = t.constant(x);
    Var a = t.cos_elem(v);
    Var b = t.sin_elem(v);
    Var cat = t.concat_rows({a, b});
    CHECK(t.value(cat).rows() == 6);
    const Tensor& back = t.value(t.slice_rows(cat, 3, 3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(back(i, j) == t.value(b)(i, j));

    const double err = gradcheck(
        [](Tape& tt, Var vv) {
            Var cc = tt.concat_rows({tt.cos_elem(vv), tt.sin_elem(vv)});
            return tt.sum(tt.slice_rows(cc, 1, 4));
        },
        x);
    CHECK(err < 1e-6);
}

TEST_CASE("add_bias broadcasts and accumulates bias gradient") {
    Parameter bias(Tensor::from_rows({{0.5}, {-0.25}}));
    const Tensor x = random_tensor(2, 5, 51);
    Tape t;
    Var out = t.add_bias(t.constant(x), t.leaf(bias));
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(t.value(out)(0, j) == x(0, j) + 0.5);
        CHECK(t.value(out)(1, j) == x(1, j) - 0.25);
    }
    t.backward(t.sum(out));
    CHECK(bias.grad(0, 0) == 5.0);  // summed over the batch
    CHECK(bias.grad(1, 0) == 5.0);
}

TEST_CASE("scale by 1x1 variable differentiates through both operands") {
    const Tensor x = random_tensor(2, 3, 61);
    const double err = gradcheck(
        [](Tape& t, Var v) {
            Var s = t.sum(t.sigmoid_elem(t.slice_rows(v, 0, 1)));
            return t.sum(t.scale(t.sin_elem(v), s));
        },
        x);
    CHECK(err < 1e-6);
}

TEST_CASE("mse loss value") {
    Tape t;
    Var pred = t.constant(Tensor::from_rows({{1, 2}, {3, 4}}));
    Var target = t.constant(Tensor::from_rows({{0, 2}, {3, 2}}));
    // residuals 1, 0, 0, 2 -> mean of squares = 5/4
    CHECK(t.value(t.mse_loss(pred, target))(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("backward requires a scalar loss") {
    Tape t;
    Var v = t.constant(Tensor(2, 2, 1.0));
    CHECK_THROWS_AS(t.backward(v), ContractError);
}

TEST_CASE("non-finite values are rejected at op boundaries") {
    Tape t;
    Tensor bad(1, 1);
    bad(0, 0) = 1e308;
    Var v = t.constant(bad);
    CHECK_THROWS_AS(t.scale(v, 1e308), NumericError);  // overflows to inf
}

TEST_CASE("parameter gradients accumulate across backward calls") {
    Parameter p(Tensor::scalar(0.8));
    const auto run = [&] {
        Tape t;
        t.backward(t.sum(t.sin_elem(t.leaf(p))));
    };
    p.grad.fill(0.0);
    run();
    const double once = p.grad(0, 0);
    run();
    CHECK(p.grad(0, 0) == doctest::Approx(2.0 * once).epsilon(1e-15));
    CHECK(once == doctest::Approx(std::cos(0.8)).epsilon(1e-12));
}

TEST_CASE("replaying identical tapes is deterministic") {
    Parameter p(random_tensor(3, 3, 71));
    const Tensor x = random_tensor(3, 2, 72);
    const auto grads = [&] {
        p.grad.fill(0.0);
        Tape t;
        t.backward(t.sum(t.gelu_elem(t.matmul(t.leaf(p), t.constant(x)))));
        return p.grad;
    };
    const Tensor g1 = grads();
    const Tensor g2 = grads();
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1.data()[i] == g2.data()[i]);
}
