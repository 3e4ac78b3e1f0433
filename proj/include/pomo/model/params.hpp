#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/mat.hpp"
#include "pomo/core/rng.hpp"

namespace pomo {

enum class ParamInit : std::uint8_t { kUniformFanIn = 0, kOnes = 1, kZeros = 2 };

// Named parameter tensors with paired gradient accumulators. Tensor order is
// fixed at construction and defines the checkpoint layout.
template <typename Real>
class ParamSet {
public:
    struct Tensor {
        std::string name;
        Mat<Real> value;
        Mat<Real> grad;
        ParamInit init;
        int fan_in;
    };

    int add(const std::string& name, int rows, int cols, ParamInit init, int fan_in = 0) {
        Tensor t;
        t.name = name;
        t.value = Mat<Real>(rows, cols);
        t.grad = Mat<Real>(rows, cols);
        t.init = init;
        t.fan_in = fan_in > 0 ? fan_in : rows;
        tensors_.push_back(std::move(t));
        return static_cast<int>(tensors_.size()) - 1;
    }

    // Draws every tensor in declaration order so a seed pins all weights.
    void init_values(Xoshiro256pp& rng) {
        for (Tensor& t : tensors_) {
            switch (t.init) {
                case ParamInit::kUniformFanIn: {
                    const double bound = 1.0 / std::sqrt(static_cast<double>(t.fan_in));
                    for (Real& v : t.value.data)
                        v = static_cast<Real>((2.0 * rng.uniform() - 1.0) * bound);
                    break;
                }
                case ParamInit::kOnes:
                    for (Real& v : t.value.data) v = Real(1);
                    break;
                case ParamInit::kZeros:
                    t.value.set_zero();
                    break;
            }
        }
    }

    void zero_grads() {
        for (Tensor& t : tensors_) t.grad.set_zero();
    }

    double grad_norm() const {
        double s = 0.0;
        for (const Tensor& t : tensors_)
            for (Real v : t.grad.data) s += static_cast<double>(v) * static_cast<double>(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const Tensor& t : tensors_)
            if (!t.value.all_finite()) return false;
        return true;
    }

    std::size_t total_params() const {
        std::size_t n = 0;
        for (const Tensor& t : tensors_) n += t.value.size();
        return n;
    }

    int count() const { return static_cast<int>(tensors_.size()); }
    Tensor& tensor(int id) { return tensors_.at(id); }
    const Tensor& tensor(int id) const { return tensors_.at(id); }
    std::vector<Tensor>& tensors() { return tensors_; }
    const std::vector<Tensor>& tensors() const { return tensors_; }

    // Value copy between sets of identical layout (actor -> critic sync).
    template <typename OtherReal>
    void copy_values_from(const ParamSet<OtherReal>& other) {
        if (other.count() != count())
            throw ConfigError("ParamSet::copy_values_from: tensor count mismatch");
        for (int i = 0; i < count(); ++i) {
            const auto& src = other.tensor(i);
            Tensor& dst = tensors_[i];
            if (src.value.rows != dst.value.rows || src.value.cols != dst.value.cols)
                throw ConfigError("ParamSet::copy_values_from: shape mismatch at tensor " +
                                  dst.name);
            for (std::size_t k = 0; k < dst.value.size(); ++k)
                dst.value.data[k] = static_cast<Real>(src.value.data[k]);
        }
    }

private:
    std::vector<Tensor> tensors_;
};

}  // namespace pomo
