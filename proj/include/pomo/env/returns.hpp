#pragma once

#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// Rewards follow the maximization convention: routing problems return the
// negated route length, knapsack returns the selected value. Each function
// re-validates its action sequence and throws ContractViolation on anything
// infeasible, so they double as ground-truth scorers in tests.

// actions must be a permutation of 0..M-1; the closing edge back to
// actions[0] is included.
double tsp_return(const TspInstance& instance, const std::vector<int>& actions);

// actions use the rollout indexing (0 = depot, 1..M customers). An implicit
// depot start and, when missing, a closing depot visit are added. Every
// customer must appear exactly once and no depot-to-depot segment may exceed
// the vehicle capacity.
double cvrp_return(const CvrpInstance& instance, const std::vector<int>& actions);

// actions use the rollout indexing (0..M-1 items, M = pad). Real items must
// be distinct and their total weight must fit the capacity; pads add nothing.
double kp_return(const KpInstance& instance, const std::vector<int>& actions);

}  // namespace pomo
