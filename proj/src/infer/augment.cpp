#include "pomo/infer/augment.hpp"

#include <cmath>

namespace pomo {

namespace {

Coord map8(const Coord& c, int which) {
    const double x = c.x, y = c.y;
    switch (which) {
        case 0: return {x, y};
        case 1: return {y, x};
        case 2: return {x, 1.0 - y};
        case 3: return {y, 1.0 - x};
        case 4: return {1.0 - x, y};
        case 5: return {1.0 - y, x};
        case 6: return {1.0 - x, 1.0 - y};
        default: return {1.0 - y, 1.0 - x};
    }
}

template <typename MapFn>
AnyInstance map_coords(const AnyInstance& instance, MapFn&& fn) {
    if (std::holds_alternative<TspInstance>(instance)) {
        TspInstance out = std::get<TspInstance>(instance);
        for (Coord& c : out.nodes) c = fn(c);
        return out;
    }
    if (std::holds_alternative<CvrpInstance>(instance)) {
        CvrpInstance out = std::get<CvrpInstance>(instance);
        out.depot = fn(out.depot);
        for (Coord& c : out.customers) c = fn(c);
        return out;
    }
    throw UnsupportedProblem("coordinate augmentation does not apply to knapsack instances");
}

}  // namespace

std::vector<AnyInstance> augment8(const AnyInstance& instance) {
    std::vector<AnyInstance> out;
    out.reserve(8);
    for (int k = 0; k < 8; ++k)
        out.push_back(map_coords(instance, [k](const Coord& c) { return map8(c, k); }));
    return out;
}

AnyInstance augment_free(const AnyInstance& instance, double degrees, double scale, double dx,
                         double dy) {
    if (!(scale > 0.0)) throw ArgumentError("augment_free: scale must be positive");
    const double rad = degrees * std::acos(-1.0) / 180.0;
    const double cs = std::cos(rad), sn = std::sin(rad);
    return map_coords(instance, [&](const Coord& c) {
        const double x = c.x - 0.5, y = c.y - 0.5;
        const double rx = cs * x - sn * y;
        const double ry = sn * x + cs * y;
        return Coord{0.5 + scale * rx + dx, 0.5 + scale * ry + dy};
    });
}

}  // namespace pomo
