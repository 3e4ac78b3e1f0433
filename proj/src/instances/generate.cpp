#include "pomo/instances/generate.hpp"

#include <algorithm>
#include <cmath>

namespace pomo {

TspInstance generate_tsp(int m, Xoshiro256pp& rng) {
    if (m < 2) throw ArgumentError("generate_tsp: node count must be >= 2");
    TspInstance instance;
    instance.nodes.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        instance.nodes.push_back({x, y});
    }
    return instance;
}

int default_cvrp_divisor(int m) {
    if (m == 20) return 30;
    if (m == 50) return 40;
    if (m == 100) return 50;
    const double d = std::ceil(30.0 + 20.0 * (m - 20) / 80.0);
    return static_cast<int>(std::clamp(d, 30.0, 50.0));
}

CvrpInstance generate_cvrp(int m, Xoshiro256pp& rng, int divisor) {
    if (m < 1) throw ArgumentError("generate_cvrp: customer count must be >= 1");
    if (divisor <= 0) divisor = default_cvrp_divisor(m);
    CvrpInstance instance;
    instance.depot = {rng.uniform(), rng.uniform()};
    instance.customers.reserve(m);
    instance.demands.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        const int raw = rng.uniform_int(1, 9);
        instance.customers.push_back({x, y});
        instance.demands.push_back(static_cast<double>(raw) / divisor);
    }
    instance.vehicle_capacity = 1.0;
    return instance;
}

double default_kp_capacity(int m) {
    if (m == 50) return 12.5;
    if (m == 100 || m == 200) return 25.0;
    return std::min(m / 4.0, 25.0);
}

KpInstance generate_kp(int m, Xoshiro256pp& rng, double capacity) {
    if (m < 1) throw ArgumentError("generate_kp: item count must be >= 1");
    if (capacity <= 0.0) capacity = default_kp_capacity(m);
    KpInstance instance;
    instance.capacity = capacity;
    instance.items.reserve(m);
    for (int i = 0; i < m; ++i) {
        const double w = rng.uniform_open();
        const double v = rng.uniform_open();
        instance.items.push_back({w, v});
    }
    return instance;
}

Dataset generate_dataset(ProblemKind kind, int m, int count, std::uint64_t seed,
                         const GenerateOptions& options) {
    if (count < 0) throw ArgumentError("generate_dataset: negative count");
    Dataset ds;
    ds.kind = kind;
    ds.seed = seed;
    ds.instances.reserve(count);
    for (int i = 0; i < count; ++i) {
        auto rng = Xoshiro256pp::stream(seed, static_cast<std::uint64_t>(i));
        switch (kind) {
            case ProblemKind::kTsp:
                ds.instances.emplace_back(generate_tsp(m, rng));
                break;
            case ProblemKind::kCvrp:
                ds.instances.emplace_back(generate_cvrp(m, rng, options.cvrp_divisor));
                break;
            case ProblemKind::kKp:
                ds.instances.emplace_back(generate_kp(m, rng, options.kp_capacity));
                break;
        }
    }
    return ds;
}

}  // namespace pomo
