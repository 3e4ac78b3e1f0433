#include <algorithm>
#include <limits>

#include "pomo/core/error.hpp"
#include "pomo/env/returns.hpp"
#include "pomo/env/rollout.hpp"
#include "pomo/oracle/oracle.hpp"

namespace pomo {

namespace {

double route_segment_length(const CvrpInstance& instance, const std::vector<int>& seg) {
    Coord pos = instance.depot;
    double length = 0.0;
    for (int c : seg) {
        length += euclid(pos, instance.customers[c]);
        pos = instance.customers[c];
    }
    return length + euclid(pos, instance.depot);
}

// 2-opt restricted to one depot-to-depot trip; endpoints stay at the depot.
void two_opt_segment(const CvrpInstance& instance, std::vector<int>& seg) {
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
            for (std::size_t j = i + 1; j < seg.size(); ++j) {
                std::reverse(seg.begin() + i, seg.begin() + j + 1);
                const double after = route_segment_length(instance, seg);
                std::reverse(seg.begin() + i, seg.begin() + j + 1);
                const double before = route_segment_length(instance, seg);
                if (after + 1e-12 < before) {
                    std::reverse(seg.begin() + i, seg.begin() + j + 1);
                    improved = true;
                }
            }
        }
    }
}

}  // namespace

OracleResult cvrp_reference(const CvrpInstance& instance) {
    const int m = static_cast<int>(instance.customers.size());
    std::vector<std::uint8_t> served(m, 0);
    int left = m;
    std::vector<std::vector<int>> trips;
    Coord pos = instance.depot;
    double room = instance.vehicle_capacity;
    std::vector<int> trip;

    while (left > 0) {
        int pick = -1;
        double pick_dist = std::numeric_limits<double>::infinity();
        for (int c = 0; c < m; ++c) {
            if (served[c] || instance.demands[c] > room + kCapacityEps) continue;
            const double d = euclid(pos, instance.customers[c]);
            if (d < pick_dist) {
                pick_dist = d;
                pick = c;
            }
        }
        if (pick < 0) {
            trips.push_back(std::move(trip));
            trip.clear();
            pos = instance.depot;
            room = instance.vehicle_capacity;
            continue;
        }
        served[pick] = 1;
        --left;
        room -= instance.demands[pick];
        pos = instance.customers[pick];
        trip.push_back(pick);
    }
    if (!trip.empty()) trips.push_back(std::move(trip));

    for (auto& seg : trips) two_opt_segment(instance, seg);

    OracleResult result;
    result.optimal = false;
    for (std::size_t i = 0; i < trips.size(); ++i) {
        if (i > 0) result.certificate.push_back(0);
        for (int c : trips[i]) result.certificate.push_back(c + 1);
    }
    result.score = -cvrp_return(instance, result.certificate);
    result.nodes_expanded = static_cast<std::uint64_t>(m);
    return result;
}

}  // namespace pomo
