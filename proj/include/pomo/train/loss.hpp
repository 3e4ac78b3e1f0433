#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/mat.hpp"

namespace pomo {

// Shared baseline over the multi-start returns of one instance.
inline double shared_baseline(const double* returns, std::size_t n) {
    if (n == 0) throw ArgumentError("shared_baseline: empty return set");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(returns[i])) throw NumericError("shared_baseline: non-finite return");
        sum += returns[i];
    }
    return sum / static_cast<double>(n);
}

inline double shared_baseline(const std::vector<double>& returns) {
    return shared_baseline(returns.data(), returns.size());
}

struct AdvantageBatch {
    std::vector<double> baselines;   // one per instance
    Mat<double> advantages;          // B x N, return minus own-instance baseline
};

// returns is B x N: one row per instance, one column per start.
inline AdvantageBatch compute_advantages(const Mat<double>& returns) {
    if (returns.rows == 0 || returns.cols == 0)
        throw ArgumentError("compute_advantages: empty return matrix");
    AdvantageBatch out;
    out.baselines.resize(returns.rows);
    out.advantages = Mat<double>(returns.rows, returns.cols);
    for (int i = 0; i < returns.rows; ++i) {
        out.baselines[i] = shared_baseline(returns.row(i), static_cast<std::size_t>(returns.cols));
        for (int j = 0; j < returns.cols; ++j)
            out.advantages.at(i, j) = returns.at(i, j) - out.baselines[i];
    }
    return out;
}

// Weights for the scalar loss node: loss = sum_rows w[r] * logprob_sum[r]
// with w[r] = -advantage[r] / (B * N).  Rows are instance-major, matching
// the rollout layout (instance i, start j at row i*N + j).
inline std::vector<double> policy_loss_weights(const Mat<double>& advantages) {
    const double scale = 1.0 / (static_cast<double>(advantages.rows) * static_cast<double>(advantages.cols));
    std::vector<double> w(static_cast<std::size_t>(advantages.rows) * advantages.cols);
    for (int i = 0; i < advantages.rows; ++i)
        for (int j = 0; j < advantages.cols; ++j)
            w[static_cast<std::size_t>(i) * advantages.cols + j] = -advantages.at(i, j) * scale;
    return w;
}

// Reference value of the loss, for tests: -(1/(B*N)) sum_ij adv_ij * logprob_ij.
inline double policy_loss_value(const Mat<double>& logprob_sums, const Mat<double>& returns) {
    if (logprob_sums.rows != returns.rows || logprob_sums.cols != returns.cols)
        throw SizeError("policy_loss_value: shape mismatch");
    AdvantageBatch adv = compute_advantages(returns);
    double loss = 0.0;
    for (int i = 0; i < returns.rows; ++i)
        for (int j = 0; j < returns.cols; ++j)
            loss += adv.advantages.at(i, j) * logprob_sums.at(i, j);
    return -loss / (static_cast<double>(returns.rows) * static_cast<double>(returns.cols));
}

}  // namespace pomo
