#pragma once

#include <cstdint>
#include <vector>

#include "fan/tensor.hpp"

namespace fan {

void zero_grad(const std::vector<Parameter*>& params);

/// Adam with decoupled weight decay. Decay is applied before the moment
/// update, so a zero-gradient step shrinks parameters by exactly
/// (1 - lr * weight_decay).
class AdamW {
public:
    struct Options {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.01;
    };

    AdamW(std::vector<Parameter*> params, Options opt);

    void step();
    std::int64_t steps_taken() const { return t_; }
    const Options& options() const { return opt_; }
    void set_lr(double lr) { opt_.lr = lr; }

private:
    struct Slot {
        Tensor m, v;
    };
    std::vector<Parameter*> params_;
    std::vector<Slot> slots_;
    Options opt_;
    std::int64_t t_ = 0;
};

/// SGD with momentum: v <- mu*v + g; p <- p - lr*v.
class Sgdm {
public:
    Sgdm(std::vector<Parameter*> params, double lr, double momentum = 0.9);

    void step();
    void set_lr(double lr) { lr_ = lr; }

private:
    std::vector<Parameter*> params_;
    std::vector<Tensor> velocity_;
    double lr_;
    double momentum_;
};

}  // namespace fan
