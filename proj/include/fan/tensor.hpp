#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace fan {

/// Thrown when operand shapes are incompatible.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a NaN/Inf reaches an op boundary.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on API misuse (e.g. backward on a non-scalar).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Thrown on invalid configs, specs, and file formats.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense rank-<=2 array of doubles, row-major.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data_[0] = v;
        return t;
    }

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor zeros_like(const Tensor& t) { return Tensor(t.rows_, t.cols_); }
    static Tensor identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    void fill(double v) { data_.assign(data_.size(), v); }

    std::string shape_str() const;

    /// Set for tensors watched by a tape (parameter values).
    bool requires_grad = false;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A trainable tensor paired with its gradient accumulator.
struct Parameter {
    Tensor value;
    Tensor grad;

    Parameter() = default;
    explicit Parameter(Tensor v) : value(std::move(v)), grad(Tensor::zeros_like(value)) {
        value.requires_grad = true;
    }

    bool empty() const { return value.empty(); }
};

}  // namespace fan
