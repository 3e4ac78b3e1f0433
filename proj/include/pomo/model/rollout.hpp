#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "pomo/core/error.hpp"
#include "pomo/core/rng.hpp"
#include "pomo/env/rollout.hpp"
#include "pomo/model/network.hpp"

namespace pomo {

enum class DecodeMode { kGreedy, kSample, kForced };

// One row per trajectory, ordered instance-major: row = instance * N + j.
struct BatchRolloutResult {
    int rows = 0;
    int n_per_instance = 0;
    int logprob_node = -1;
    std::vector<std::vector<int>> actions;
    std::vector<double> returns;
    std::vector<double> logprob_sums;
};

namespace detail {

// Uniform facade over B same-kind env rollouts with N trajectories each.
class EnvBatch {
public:
    EnvBatch(const std::vector<const AnyInstance*>& instances,
             const std::vector<std::vector<int>>& starts) {
        b_ = static_cast<int>(instances.size());
        if (b_ == 0 || static_cast<int>(starts.size()) != b_)
            throw ArgumentError("EnvBatch: instance/start count mismatch");
        kind_ = kind_of(*instances[0]);
        n_ = static_cast<int>(starts[0].size());
        m_ = static_cast<int>(instance_size(*instances[0]));
        for (int i = 0; i < b_; ++i) {
            if (static_cast<int>(starts[i].size()) != n_)
                throw ArgumentError("EnvBatch: every instance needs the same trajectory count");
            switch (kind_) {
                case ProblemKind::kTsp:
                    tsp_.emplace_back(std::get<TspInstance>(*instances[i]), starts[i]);
                    break;
                case ProblemKind::kCvrp:
                    cvrp_.emplace_back(std::get<CvrpInstance>(*instances[i]), starts[i]);
                    break;
                case ProblemKind::kKp:
                    kp_.emplace_back(std::get<KpInstance>(*instances[i]), starts[i]);
                    break;
            }
        }
    }

    ProblemKind kind() const { return kind_; }
    int rows() const { return b_ * n_; }
    int n_per_instance() const { return n_; }
    // Width of the network's action scores = embedding block rows.
    int net_cols() const { return kind_ == ProblemKind::kCvrp ? m_ + 1 : m_; }
    int pad_action() const { return kind_ == ProblemKind::kKp ? m_ : 0; }

    bool all_done() const {
        for (const auto& e : tsp_)
            if (!e.all_done()) return false;
        for (const auto& e : cvrp_)
            if (!e.all_done()) return false;
        for (const auto& e : kp_)
            if (!e.all_done()) return false;
        return true;
    }

    bool done(int row) const {
        const int i = row / n_, j = row % n_;
        switch (kind_) {
            case ProblemKind::kTsp: return tsp_[i].done_flags()[j] != 0;
            case ProblemKind::kCvrp: return cvrp_[i].done_flags()[j] != 0;
            default: return kp_[i].done_flags()[j] != 0;
        }
    }

    int steps_taken() const {
        switch (kind_) {
            case ProblemKind::kTsp: return tsp_[0].steps_taken();
            case ProblemKind::kCvrp: return cvrp_[0].steps_taken();
            default: return kp_[0].steps_taken();
        }
    }

    // Context rows for every trajectory; done rows get placeholder indices
    // (their outputs never reach the loss).
    std::vector<ContextSpec> context_specs() const {
        std::vector<ContextSpec> specs(rows());
        for (int row = 0; row < rows(); ++row) {
            const int i = row / n_, j = row % n_;
            ContextSpec& s = specs[row];
            s.group = i;
            switch (kind_) {
                case ProblemKind::kTsp:
                    s.last_row = tsp_[i].current_nodes()[j];
                    s.first_row = tsp_[i].start_nodes()[j];
                    s.extra = 0.0;
                    break;
                case ProblemKind::kCvrp:
                    s.last_row = cvrp_[i].current_nodes()[j];
                    s.first_row = cvrp_[i].start_nodes()[j];
                    s.extra = cvrp_[i].remaining_capacity()[j];
                    break;
                default:
                    s.last_row = kp_[i].current_items()[j];
                    s.first_row = kp_[i].start_nodes()[j];
                    s.extra = kp_[i].remaining_capacity()[j];
                    break;
            }
        }
        return specs;
    }

    // Network-facing mask over the embedding block. Active rows carry the
    // env legality (KP drops the pad column); finished rows are set to
    // all-ones so the softmax stays well-defined, and are excluded from the
    // logprob gather instead.
    std::vector<std::uint8_t> net_mask() const {
        const int cols = net_cols();
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(rows()) * cols, 1);
        for (int i = 0; i < b_; ++i) {
            std::vector<std::uint8_t> env_mask;
            int env_cols = 0;
            switch (kind_) {
                case ProblemKind::kTsp:
                    env_mask = tsp_[i].legal_mask();
                    env_cols = m_;
                    break;
                case ProblemKind::kCvrp:
                    env_mask = cvrp_[i].legal_mask();
                    env_cols = m_ + 1;
                    break;
                default:
                    env_mask = kp_[i].legal_mask();
                    env_cols = m_ + 1;
                    break;
            }
            for (int j = 0; j < n_; ++j) {
                const int row = i * n_ + j;
                if (done(row)) continue;
                std::uint8_t* dst = mask.data() + static_cast<std::size_t>(row) * cols;
                const std::uint8_t* src = env_mask.data() + static_cast<std::size_t>(j) * env_cols;
                for (int c = 0; c < cols; ++c) dst[c] = src[c];
            }
        }
        return mask;
    }

    void step(const std::vector<int>& actions, const std::vector<double>& logprobs) {
        std::vector<int> a(n_);
        std::vector<double> lp(n_);
        for (int i = 0; i < b_; ++i) {
            for (int j = 0; j < n_; ++j) {
                a[j] = actions[i * n_ + j];
                lp[j] = logprobs[i * n_ + j];
            }
            switch (kind_) {
                case ProblemKind::kTsp: tsp_[i].step(a, &lp); break;
                case ProblemKind::kCvrp: cvrp_[i].step(a, &lp); break;
                default: kp_[i].step(a, &lp); break;
            }
        }
    }

    std::vector<double> returns() const {
        std::vector<double> out;
        out.reserve(rows());
        auto append = [&](const std::vector<double>& r) {
            out.insert(out.end(), r.begin(), r.end());
        };
        for (const auto& e : tsp_) append(e.returns());
        for (const auto& e : cvrp_) append(e.returns());
        for (const auto& e : kp_) append(e.returns());
        return out;
    }

    std::vector<std::vector<int>> actions() const {
        std::vector<std::vector<int>> out;
        out.reserve(rows());
        for (const auto& e : tsp_)
            out.insert(out.end(), e.actions().begin(), e.actions().end());
        for (const auto& e : cvrp_)
            out.insert(out.end(), e.actions().begin(), e.actions().end());
        for (const auto& e : kp_)
            out.insert(out.end(), e.actions().begin(), e.actions().end());
        return out;
    }

private:
    ProblemKind kind_ = ProblemKind::kTsp;
    int b_ = 0, n_ = 0, m_ = 0;
    std::vector<TspRollout> tsp_;
    std::vector<CvrpRollout> cvrp_;
    std::vector<KpRollout> kp_;
};

template <typename Real>
int pick_greedy_col(const Mat<Real>& probs, int row) {
    int best = 0;
    Real best_p = probs.at(row, 0);
    for (int j = 1; j < probs.cols; ++j)
        if (probs.at(row, j) > best_p) {
            best_p = probs.at(row, j);
            best = j;
        }
    return best;
}

template <typename Real>
int pick_sample_col(const Mat<Real>& probs, int row, double u) {
    double cum = 0.0;
    int last_positive = -1;
    for (int j = 0; j < probs.cols; ++j) {
        const double p = static_cast<double>(probs.at(row, j));
        if (p <= 0.0) continue;
        last_positive = j;
        cum += p;
        if (u < cum) return j;
    }
    return last_positive;
}

// Shared decode loop: steps the env batch to completion while recording the
// per-trajectory logprob sums into graph node `acc`.
template <typename Real>
void run_decode_loop(Graph<Real>& g, const Network<Real>& net,
                     const typename Network<Real>::Encoded& enc, EnvBatch& env, int& acc,
                     std::vector<double>& lp_out, DecodeMode mode, Xoshiro256pp* rng,
                     const std::vector<std::vector<int>>* forced) {
    const int rows = env.rows();
    while (!env.all_done()) {
        const int probs = net.decode_step(g, enc, env.context_specs(), env.net_mask());
        const Mat<Real>& p = g.value(probs);
        std::vector<int> actions(rows);
        std::vector<double> lps(rows, 0.0);
        std::vector<std::pair<int, int>> picks;
        std::vector<int> pick_rows;
        const int t = env.steps_taken();
        for (int row = 0; row < rows; ++row) {
            if (env.done(row)) {
                actions[row] = env.pad_action();
                continue;
            }
            int col;
            switch (mode) {
                case DecodeMode::kGreedy:
                    col = pick_greedy_col(p, row);
                    break;
                case DecodeMode::kSample:
                    if (!rng) throw ArgumentError("sample mode needs an rng");
                    col = pick_sample_col(p, row, rng->uniform());
                    break;
                default:
                    if (!forced) throw ArgumentError("forced mode needs action sequences");
                    col = forced->at(row).at(t);
                    break;
            }
            actions[row] = col;
            lps[row] = std::log(static_cast<double>(p.at(row, col)));
            picks.emplace_back(row, col);
            pick_rows.push_back(row);
        }
        env.step(actions, lps);
        for (int row = 0; row < rows; ++row) lp_out[row] += lps[row];
        const int step_lp = g.gather_log(probs, std::move(picks));
        acc = g.scatter_add_rows(acc, step_lp, std::move(pick_rows));
    }
}

}  // namespace detail

// Multi-start rollout: trajectory j of instance i starts at starts[i][j]
// (applied by env reset; the decoder runs from the second action on).
template <typename Real>
BatchRolloutResult rollout_batch(Graph<Real>& g, const Network<Real>& net,
                                 const std::vector<const AnyInstance*>& instances,
                                 const std::vector<std::vector<int>>& starts, DecodeMode mode,
                                 Xoshiro256pp* rng = nullptr,
                                 const std::vector<std::vector<int>>* forced = nullptr) {
    detail::EnvBatch env(instances, starts);
    const typename Network<Real>::Encoded enc = net.encode(g, instances);
    int acc = g.zeros(env.rows(), 1);
    BatchRolloutResult result;
    result.rows = env.rows();
    result.n_per_instance = env.n_per_instance();
    result.logprob_sums.assign(env.rows(), 0.0);
    detail::run_decode_loop(g, net, enc, env, acc, result.logprob_sums, mode, rng, forced);
    result.logprob_node = acc;
    result.actions = env.actions();
    result.returns = env.returns();
    return result;
}

// START-token rollout: the decoder also picks the first action, using the
// trainable token pair in the last/first context slots; one trajectory per
// instance. The t=1 logprob is part of the sum.
template <typename Real>
BatchRolloutResult start_token_rollout_batch(
    Graph<Real>& g, const Network<Real>& net, const std::vector<const AnyInstance*>& instances,
    DecodeMode mode, Xoshiro256pp* rng = nullptr,
    const std::vector<std::vector<int>>* forced = nullptr) {
    if (net.config().variant != Variant::kStartToken)
        throw ConfigError("start_token_rollout requires a START_TOKEN-variant model");
    const int b = static_cast<int>(instances.size());
    if (b == 0) throw ArgumentError("start_token_rollout_batch: empty batch");
    const ProblemKind kind = kind_of(*instances[0]);
    const int m = static_cast<int>(instance_size(*instances[0]));

    const typename Network<Real>::Encoded enc = net.encode(g, instances);
    int acc = g.zeros(b, 1);

    std::vector<ContextSpec> specs(b);
    const int cols = kind == ProblemKind::kCvrp ? m + 1 : m;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(b) * cols, 1);
    for (int i = 0; i < b; ++i) {
        specs[i].group = i;
        specs[i].last_row = -1;
        specs[i].first_row = -1;
        if (kind == ProblemKind::kCvrp) {
            const auto& inst = std::get<CvrpInstance>(*instances[i]);
            specs[i].extra = inst.vehicle_capacity;
            mask[static_cast<std::size_t>(i) * cols] = 0;  // not the depot at t=1
        } else if (kind == ProblemKind::kKp) {
            const auto& inst = std::get<KpInstance>(*instances[i]);
            specs[i].extra = inst.capacity;
            for (int j = 0; j < m; ++j)
                if (inst.items[j].weight > inst.capacity + kCapacityEps)
                    mask[static_cast<std::size_t>(i) * cols + j] = 0;
        }
    }

    const int probs = net.decode_step(g, enc, std::move(specs), mask);
    const Mat<Real>& p = g.value(probs);
    std::vector<std::vector<int>> starts(b);
    std::vector<std::pair<int, int>> picks;
    std::vector<int> pick_rows;
    BatchRolloutResult result;
    result.rows = b;
    result.n_per_instance = 1;
    result.logprob_sums.assign(b, 0.0);
    for (int i = 0; i < b; ++i) {
        int col;
        switch (mode) {
            case DecodeMode::kGreedy:
                col = detail::pick_greedy_col(p, i);
                break;
            case DecodeMode::kSample:
                if (!rng) throw ArgumentError("sample mode needs an rng");
                col = detail::pick_sample_col(p, i, rng->uniform());
                break;
            default:
                if (!forced) throw ArgumentError("forced mode needs action sequences");
                col = forced->at(i).at(0);
                break;
        }
        starts[i] = {col};
        result.logprob_sums[i] = std::log(static_cast<double>(p.at(i, col)));
        picks.emplace_back(i, col);
        pick_rows.push_back(i);
    }
    const int first_lp = g.gather_log(probs, std::move(picks));
    acc = g.scatter_add_rows(acc, first_lp, std::move(pick_rows));

    detail::EnvBatch env(instances, starts);
    detail::run_decode_loop(g, net, enc, env, acc, result.logprob_sums, mode, rng, forced);
    result.logprob_node = acc;
    result.actions = env.actions();
    result.returns = env.returns();
    return result;
}

}  // namespace pomo
