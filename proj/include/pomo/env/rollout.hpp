#pragma once

#include <cstdint>
#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// Tolerance for <= comparisons on accumulated floating-point capacities.
inline constexpr double kCapacityEps = 1e-9;

// Batched rollout state: N trajectories over one instance, advanced in lock
// step. Action spaces:
//   TSP   A = M     actions are node indices
//   CVRP  A = M+1   action 0 is the depot, 1..M are customers
//   KP    A = M+1   actions 0..M-1 are items, M is the zero-value pad item
// Finished trajectories keep stepping on the pad action (CVRP: depot, KP:
// item M) with probability 1, so every trajectory in a batch records the
// same number of actions. Pad steps never touch the logprob sum.

class TspRollout {
public:
    TspRollout(const TspInstance& instance, const std::vector<int>& start_nodes);

    int n() const { return n_; }
    int m() const { return m_; }
    int action_count() const { return m_; }
    int steps_taken() const { return t_; }
    bool all_done() const { return t_ >= m_; }

    std::vector<std::uint8_t> legal_mask() const;
    void step(const std::vector<int>& actions, const std::vector<double>* logprobs = nullptr);

    const std::vector<int>& current_nodes() const { return current_; }
    const std::vector<int>& start_nodes() const { return starts_; }
    const std::vector<std::uint8_t>& done_flags() const { return done_; }
    const std::vector<std::vector<int>>& actions() const { return actions_; }
    const std::vector<double>& logprob_sums() const { return logprob_sums_; }
    std::vector<double> returns() const;

private:
    const TspInstance* instance_;
    int n_ = 0;
    int m_ = 0;
    int t_ = 0;
    std::vector<int> starts_;
    std::vector<int> current_;
    std::vector<std::uint8_t> visited_;  // n x m
    std::vector<std::uint8_t> done_;
    std::vector<std::vector<int>> actions_;
    std::vector<double> logprob_sums_;
};

class CvrpRollout {
public:
    // start_nodes are action indices, so customers are 1..M.
    CvrpRollout(const CvrpInstance& instance, const std::vector<int>& start_nodes);

    int n() const { return n_; }
    int m() const { return m_; }
    int action_count() const { return m_ + 1; }
    int steps_taken() const { return t_; }
    bool all_done() const;

    std::vector<std::uint8_t> legal_mask() const;
    void step(const std::vector<int>& actions, const std::vector<double>* logprobs = nullptr);

    const std::vector<int>& current_nodes() const { return current_; }
    const std::vector<int>& start_nodes() const { return starts_; }
    const std::vector<std::uint8_t>& done_flags() const { return done_; }
    const std::vector<double>& remaining_capacity() const { return remaining_; }
    const std::vector<std::vector<int>>& actions() const { return actions_; }
    const std::vector<double>& logprob_sums() const { return logprob_sums_; }
    std::vector<double> returns() const;

private:
    bool action_legal(int traj, int action) const;

    const CvrpInstance* instance_;
    int n_ = 0;
    int m_ = 0;
    int t_ = 0;
    std::vector<int> starts_;
    std::vector<int> current_;  // 0 = depot
    std::vector<std::uint8_t> visited_;  // n x m, customers only
    std::vector<int> visited_count_;
    std::vector<double> remaining_;
    std::vector<std::uint8_t> done_;
    std::vector<std::vector<int>> actions_;
    std::vector<double> logprob_sums_;
};

class KpRollout {
public:
    KpRollout(const KpInstance& instance, const std::vector<int>& start_items);

    int n() const { return n_; }
    int m() const { return m_; }
    int action_count() const { return m_ + 1; }
    int pad_action() const { return m_; }
    int steps_taken() const { return t_; }
    bool all_done() const;

    std::vector<std::uint8_t> legal_mask() const;
    void step(const std::vector<int>& actions, const std::vector<double>* logprobs = nullptr);

    const std::vector<int>& current_items() const { return current_; }
    const std::vector<int>& start_nodes() const { return starts_; }
    const std::vector<std::uint8_t>& done_flags() const { return done_; }
    const std::vector<double>& remaining_capacity() const { return remaining_; }
    const std::vector<std::vector<int>>& actions() const { return actions_; }
    const std::vector<double>& logprob_sums() const { return logprob_sums_; }
    std::vector<double> returns() const;

private:
    bool anything_fits(int traj) const;

    const KpInstance* instance_;
    int n_ = 0;
    int m_ = 0;
    int t_ = 0;
    std::vector<int> starts_;
    std::vector<int> current_;
    std::vector<std::uint8_t> selected_;  // n x m
    std::vector<double> remaining_;
    std::vector<std::uint8_t> done_;
    std::vector<std::vector<int>> actions_;
    std::vector<double> logprob_sums_;
};

}  // namespace pomo
