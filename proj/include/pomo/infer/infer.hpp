#pragma once

#include <string>
#include <vector>

#include "pomo/core/rng.hpp"
#include "pomo/model/network.hpp"

namespace pomo {

// Candidate returns are always scored on the original instance, so the
// dominance chain single <= multi <= augmented holds exactly.
struct InferenceResult {
    std::vector<int> best_actions;         // includes the first action
    double best_return = 0.0;
    std::vector<double> candidate_returns; // one per decoded trajectory
    std::string mode;
    int n_candidates = 0;
};

// One greedy rollout from a uniformly drawn start. (The network is taken
// non-const because rollouts bind its parameters to a fresh graph; weights
// are never modified.)
InferenceResult infer_single(Network<float>& net, const AnyInstance& instance, Xoshiro256pp& rng,
                             int threads = 1);

// Greedy rollouts from every start as parallel rows; best return wins,
// earliest candidate on ties.
InferenceResult infer_multi_greedy(Network<float>& net, const AnyInstance& instance,
                                   int threads = 1);

// Multi-greedy over the eight coordinate symmetries (depot included for
// CVRP). Candidates are ordered variant-major with the identity first, so
// the multi-greedy candidate set is the prefix. Every candidate is re-scored
// on the original coordinates before the winner is chosen.
// Knapsack: UnsupportedProblem.
InferenceResult infer_augmented(Network<float>& net, const AnyInstance& instance,
                                int threads = 1);

// Best of k sampled rollouts, each from a uniformly drawn start
// (START_TOKEN models let the decoder pick it instead).
InferenceResult infer_sampling(Network<float>& net, const AnyInstance& instance, int k,
                               Xoshiro256pp& rng, int threads = 1);

// Start-token models decode the first action themselves; greedy is a single
// deterministic trajectory.
InferenceResult infer_start_token_greedy(Network<float>& net, const AnyInstance& instance,
                                         int threads = 1);

}  // namespace pomo
