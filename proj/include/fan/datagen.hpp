#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fan/tensor.hpp"

namespace fan {

struct Sinusoid {
    double amp = 1.0;
    double freq = 1.0;
    double phase = 0.0;
};

/// A closed-form scalar target function.
struct TaskSpec {
    enum class Kind {
        Sin,               // sin(a*x)
        SumSinusoids,      // sum of amp*sin(freq*x + phase)
        Mod,               // x mod k, non-negative remainder
        ComplexPeriodicA,  // exp(sin^2(pi x) + cos x + (x mod 3) - 1)
        ComplexPeriodicB,  // exp(sin^2(pi x) + cos x + (x mod 3)) - 1
        SquareWave,        // sign(sin(2 pi x / T))
        Symbolic,          // multivariate formula from the built-in list
    };

    Kind kind = Kind::Sin;
    double sin_freq = 1.0;
    std::vector<Sinusoid> terms;
    double modulus = 5.0;
    double square_period = 6.283185307179586477;
    std::string formula_id;

    std::size_t input_dim() const;
    double eval(double x) const;                      // 1-D targets
    double eval(std::span<const double> x) const;     // any dimension
    std::string name() const;
};

/// Sampling domains: train interval strictly inside the test interval, grid
/// density expressed as points per period.
struct SplitSpec {
    double train_lo = -12.566370614359172954, train_hi = 12.566370614359172954;
    double test_lo = -50.265482457436689815, test_hi = 50.265482457436689815;
    double points_per_period = 256.0;
    double period_hint = 6.283185307179586477;

    void validate() const;
    double grid_step() const { return period_hint / points_per_period; }
};

enum class Region : std::uint8_t { Train, IdTest, OodTest };

const char* to_string(Region r);

struct Dataset {
    Tensor inputs;   // d_in x n
    Tensor targets;  // d_out x n
    std::vector<Region> tags;

    std::size_t count(Region r) const;
    /// Columns of inputs/targets carrying the given tag, in dataset order.
    std::pair<Tensor, Tensor> select(Region r) const;
};

/// Uniform grid over the test interval at spacing h = period/points_per_period,
/// plus the same grid offset by h/2. On-grid points inside the train interval
/// are Train, offset points inside it are IdTest, everything else is OodTest.
Dataset generate_dataset(const TaskSpec& task, const SplitSpec& split);

/// Seeded uniform-random draws in [-1,1]^d for the reduced symbolic tasks;
/// train and test are disjoint draws tagged Train / IdTest.
Dataset symbolic_dataset(const std::string& formula_id, std::uint64_t seed,
                         std::size_t n_train = 600, std::size_t n_test = 200);

std::vector<std::string> symbolic_formula_ids();

/// Fourier coefficients of a T-periodic target by composite Simpson
/// quadrature: a[0] is the mean, a[n]/b[n] (n >= 1) the cos/sin projections.
struct FourierCoefficients {
    std::vector<double> a;  // size N+1, a[0] = mean
    std::vector<double> b;  // size N+1, b[0] unused (0)
};

FourierCoefficients fourier_coefficients(const TaskSpec& task, double period, std::size_t n_terms,
                                         std::size_t panels = 65536);

/// Direct evaluation of the truncated series with the given coefficients.
double fourier_series_eval(const FourierCoefficients& c, double period, double x);

}  // namespace fan
