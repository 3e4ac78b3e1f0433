#pragma once

#include "pomo/core/rng.hpp"
#include "pomo/instances/types.hpp"

namespace pomo {

// Coordinates i.i.d. uniform on the unit square. m >= 2.
TspInstance generate_tsp(int m, Xoshiro256pp& rng);

// Demand divisor used when the caller does not supply one: the three standard
// sizes use 30/40/50, any other size falls back to
// ceil(30 + 20*(m-20)/80) clamped to [30, 50].
int default_cvrp_divisor(int m);

// Customers and depot uniform on the unit square; integer demands from
// {1..9} scaled by 1/divisor; vehicle capacity 1. divisor <= 0 selects
// default_cvrp_divisor(m).
CvrpInstance generate_cvrp(int m, Xoshiro256pp& rng, int divisor = 0);

// Knapsack capacity used when the caller does not supply one: 12.5 at m=50
// and 25 at m=100/200, extended as min(m/4, 25) elsewhere.
double default_kp_capacity(int m);

// Item weights and values i.i.d. uniform on the open interval (0, 1).
// capacity <= 0 selects default_kp_capacity(m).
KpInstance generate_kp(int m, Xoshiro256pp& rng, double capacity = 0.0);

struct GenerateOptions {
    int cvrp_divisor = 0;      // 0 = size-based default
    double kp_capacity = 0.0;  // 0 = size-based default
};

// Dataset of `count` fresh instances. Instance i draws from the substream
// Xoshiro256pp::stream(seed, i), so generation order (or parallel
// generation) cannot change the result.
Dataset generate_dataset(ProblemKind kind, int m, int count, std::uint64_t seed,
                         const GenerateOptions& options = {});

}  // namespace pomo
