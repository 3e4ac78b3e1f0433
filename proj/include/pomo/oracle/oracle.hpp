#pragma once

#include <cstdint>
#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// Scores are positive objective values: tour/route length for TSP and CVRP,
// selected value for KP. The env return functions negate routing lengths, so
// certificate re-scoring uses -tsp_return / -cvrp_return.
// Certificates use env action indexing: a node permutation for TSP, a route
// with depot 0 and customers 1..M for CVRP (leading/closing depot implicit),
// selected item indices for KP.
struct OracleResult {
    bool optimal = false;
    double score = 0.0;
    std::vector<int> certificate;
    std::uint64_t nodes_expanded = 0;
};

// Exact DP over node subsets; memory grows as 2^M * M, capped at M <= 20
// (throws SizeError beyond). threads > 1 parallelizes each subset-size layer
// with OpenMP; every cell is computed identically in both variants, so the
// result is bitwise equal to the serial one.
OracleResult held_karp_tsp(const TspInstance& instance, int threads = 1);

// Exhaustive minimum over (M-1)!/2 direction-distinct tours; M <= 10.
OracleResult brute_force_tsp(const TspInstance& instance);

// Deterministic farthest-insertion heuristic, ties broken by lowest index;
// M >= 3.
OracleResult farthest_insertion_tsp(const TspInstance& instance);

// Depth-first branch-and-bound with the Dantzig fractional bound over items
// sorted by value/weight. Exact; throws ResourceError past max_nodes.
OracleResult kp_exact(const KpInstance& instance, std::uint64_t max_nodes = 100'000'000);

// Exhaustive 2^M subset sweep; M <= 16 (test oracle for kp_exact).
OracleResult kp_enumerate(const KpInstance& instance);

// Take items in decreasing value/weight ratio while they fit.
OracleResult kp_greedy(const KpInstance& instance);

// Capacity-aware nearest-neighbor construction plus 2-opt within each trip.
OracleResult cvrp_reference(const CvrpInstance& instance);

}  // namespace pomo
