#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fan/tape.hpp"

namespace fan {

enum class Activation { Gelu, Relu, Identity };
enum class LayerKind { Fan, FanGated, Mlp, Fsnn, FnnAct, Snake, Linear };

const char* to_string(LayerKind k);
const char* to_string(Activation a);

/// Declarative description of one layer.
struct LayerSpec {
    LayerKind kind = LayerKind::Mlp;
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    std::size_t d_p = 0;           // Fan/FanGated: rows of the periodic projection
    std::size_t fourier_terms = 0; // Fsnn: number of frequencies N
    Activation act = Activation::Gelu;
    bool residual = false;

    std::size_t d_pbar() const { return d_out - 2 * d_p; }
    void validate() const;
};

/// An ordered layer stack; the last layer must be a plain linear map.
struct NetworkSpec {
    std::vector<LayerSpec> layers;

    void validate() const;
    std::size_t input_dim() const { return layers.front().d_in; }
    std::size_t output_dim() const { return layers.back().d_out; }
};

/// Convenience builder: n_hidden layers of `kind` (d_in -> d_h -> ... -> d_h)
/// followed by a linear head d_h -> d_out. For Fan kinds, d_p =
/// floor(dp_ratio * d_h); for Fsnn, N = d_h / 2 unless fsnn_terms is given.
NetworkSpec stack_spec(LayerKind kind, std::size_t d_in, std::size_t d_h, std::size_t d_out,
                       int n_hidden, double dp_ratio = 0.25, Activation act = Activation::Gelu,
                       bool residual = false, std::size_t fsnn_terms = 0);

/// Parameter/FLOP accounting: exact scalar counts alongside the closed-form
/// layer formulas, which overcount Fan biases by d_p per layer.
struct CostReport {
    std::int64_t exact_params = 0;
    std::int64_t table_params = 0;
    std::int64_t exact_flops = 0;
    std::int64_t table_flops = 0;
    std::int64_t flops_nonlinear = 1;  // cost charged per elementwise nonlinear output
};

CostReport count_costs(const LayerSpec& spec, std::int64_t flops_nonlinear = 1);
CostReport count_costs(const NetworkSpec& spec, std::int64_t flops_nonlinear = 1);

/// One materialized layer. Unused parameter slots stay empty.
struct Layer {
    LayerSpec spec;

    Parameter w_p, w_pbar, b_pbar;  // Fan / FanGated
    Parameter raw_gate;             // FanGated; effective gate g = sigmoid(raw_gate)
    Parameter w, b;                 // Mlp / FnnAct / Snake / Linear
    Parameter w_in, w_out, bias;    // Fsnn

    Var forward(Tape& tape, Var x);
    std::vector<Parameter*> params();
};

struct Network {
    NetworkSpec spec;
    std::vector<Layer> layers;

    Var forward(Tape& tape, Var x);
    /// Forward without gradient bookkeeping kept around; runs on a throwaway tape.
    Tensor forward_value(const Tensor& x);
    std::vector<Parameter*> parameters();
};

/// Allocates and initializes all parameters; pure function of (spec, seed).
/// Weights uniform in +-1/sqrt(d_in), biases zero, raw_gate zero (g = 0.5).
Network build_network(const NetworkSpec& spec, std::uint64_t seed);

/// One initialized layer, drawing from the caller's generator.
Layer build_layer(const LayerSpec& spec, std::mt19937_64& rng);

/// A 1->1 Fsnn layer wired to evaluate the truncated Fourier series with the
/// given coefficients: frequencies 2*pi*n/period in w_in, a_n/b_n in w_out,
/// a_0 in the bias. a and b have size N+1 with index 0 holding the mean.
Layer fsnn_from_series(std::span<const double> a, std::span<const double> b, double period);

/// Smallest hidden width whose stack_spec(kind, ...) parameter count is
/// closest to target_params. Used to parameter-match baselines.
std::size_t match_hidden_width(std::int64_t target_params, LayerKind kind, std::size_t d_in,
                               std::size_t d_out, int n_hidden, Activation act = Activation::Gelu);

}  // namespace fan
