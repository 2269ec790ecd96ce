#include "fan/optim.hpp"

#include <cmath>

namespace fan {

void zero_grad(const std::vector<Parameter*>& params) {
    for (Parameter* p : params) p->grad.fill(0.0);
}

AdamW::AdamW(std::vector<Parameter*> params, Options opt)
    : params_(std::move(params)), opt_(opt) {
    if (params_.empty()) throw ContractError("AdamW: no parameters");
    slots_.reserve(params_.size());
    for (Parameter* p : params_)
        slots_.push_back({Tensor::zeros_like(p->value), Tensor::zeros_like(p->value)});
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        Slot& s = slots_[k];
        double* pv = p.value.data();
        const double* g = p.grad.data();
        double* m = s.m.data();
        double* v = s.v.data();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            pv[i] *= 1.0 - opt_.lr * opt_.weight_decay;
            m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g[i];
            v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            pv[i] -= opt_.lr * mhat / (std::sqrt(vhat) + opt_.eps);
        }
    }
}

Sgdm::Sgdm(std::vector<Parameter*> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
    if (params_.empty()) throw ContractError("Sgdm: no parameters");
    velocity_.reserve(params_.size());
    for (Parameter* p : params_) velocity_.push_back(Tensor::zeros_like(p->value));
}

void Sgdm::step() {
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Parameter& p = *params_[k];
        double* pv = p.value.data();
        const double* g = p.grad.data();
        double* v = velocity_[k].data();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            v[i] = momentum_ * v[i] + g[i];
            pv[i] -= lr_ * v[i];
        }
    }
}

}  // namespace fan
