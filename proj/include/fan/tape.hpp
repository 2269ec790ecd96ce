#pragma once

#include <functional>
#include <vector>

#include "fan/tensor.hpp"

namespace fan {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
};

/// Records a forward pass and replays it in reverse to accumulate gradients
/// into the Parameters it watches. One tape per forward pass, one thread at
/// a time.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Watch a parameter; backward() accumulates into p.grad.
    Var leaf(Parameter& p);
    /// Non-differentiable input.
    Var constant(Tensor t);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);                       // same-shape elementwise
    Var add_bias(Var x, Var b);                  // b is rows x 1, broadcast over columns
    Var concat_rows(const std::vector<Var>& parts);
    Var slice_rows(Var x, std::size_t row0, std::size_t nrows);

    Var cos_elem(Var x);
    Var sin_elem(Var x);
    Var gelu_elem(Var x);                        // exact erf form
    Var relu_elem(Var x);
    Var sigmoid_elem(Var x);
    Var snake_elem(Var x);                       // z + sin^2(z)

    /// Elementwise map with caller-supplied value/derivative rules.
    Var map_unary(Var x, std::function<double(double)> f, std::function<double(double)> df);

    Var scale(Var x, double s);
    Var scale(Var x, Var s);                     // s is 1x1
    Var one_minus(Var x);                        // 1 - x elementwise
    Var sum(Var x);                              // 1x1
    Var mse_loss(Var pred, Var target);

    /// Seed d(loss)/d(loss)=1 and run the recorded ops in reverse. Node
    /// gradients are reset first, so replaying the same tape is bit-identical;
    /// Parameter grads accumulate across calls.
    void backward(Var loss);

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        // Pulls this node's grad back into its inputs' grads.
        std::function<void(Tape&, const Tensor&)> pull;
        Parameter* leaf = nullptr;
    };

    std::vector<Node> nodes_;

    Var push(Tensor value, std::function<void(Tape&, const Tensor&)> pull = {});
    Tensor& grad_mut(std::size_t id) { return nodes_[id].grad; }
    static void check_finite(const Tensor& t, const char* op);

    friend struct Var;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

/// Max relative error between the tape gradient of the scalar function f and
/// a central finite difference, over all coordinates of x.
/// error_i = |analytic_i - fd_i| / max(1, |analytic_i|).
double gradcheck(const std::function<Var(Tape&, Var)>& f, const Tensor& x, double eps = 1e-5);

}  // namespace fan
