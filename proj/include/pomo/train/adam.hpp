#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/model/params.hpp"

namespace pomo {

// Adam with decoupled-from-nothing weight decay: the decay term is added to
// the gradient before the moment updates, so decay flows through the moment
// estimates like any other gradient component.
template <typename Real>
class Adam {
public:
    Adam(ParamSet<Real>& params, double lr, double weight_decay,
         double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(&params), lr_(lr), weight_decay_(weight_decay),
          beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (!(lr > 0.0)) throw ArgumentError("Adam: learning rate must be positive");
        if (weight_decay < 0.0) throw ArgumentError("Adam: negative weight decay");
        m_.resize(static_cast<std::size_t>(params.count()));
        v_.resize(static_cast<std::size_t>(params.count()));
        for (int i = 0; i < params.count(); ++i) {
            const auto& t = params.tensor(i);
            m_[i].assign(t.value.size(), 0.0);
            v_[i].assign(t.value.size(), 0.0);
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (int i = 0; i < params_->count(); ++i) {
            auto& tensor = params_->tensor(i);
            auto& m = m_[i];
            auto& v = v_[i];
            for (std::size_t k = 0; k < tensor.value.size(); ++k) {
                const double theta = static_cast<double>(tensor.value.data[k]);
                double g = static_cast<double>(tensor.grad.data[k]) + weight_decay_ * theta;
                m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
                v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
                const double mhat = m[k] / bc1;
                const double vhat = v[k] / bc2;
                tensor.value.data[k] =
                    static_cast<Real>(theta - lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    double lr() const { return lr_; }
    void set_lr(double lr) {
        if (!(lr > 0.0)) throw ArgumentError("Adam: learning rate must be positive");
        lr_ = lr;
    }
    std::uint64_t steps_taken() const { return t_; }

private:
    ParamSet<Real>* params_;
    double lr_;
    double weight_decay_;
    double beta1_;
    double beta2_;
    double eps_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace pomo
