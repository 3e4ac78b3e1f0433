#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "pomo/core/error.hpp"
#include "pomo/oracle/oracle.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pomo {

namespace {

std::vector<double> distance_matrix(const TspInstance& instance) {
    const int m = static_cast<int>(instance.nodes.size());
    std::vector<double> d(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            d[static_cast<std::size_t>(i) * m + j] = euclid(instance.nodes[i], instance.nodes[j]);
    return d;
}

// dp is indexed by (subset of nodes 1..m-1, last node); each cell depends
// only on strictly smaller subsets, so any subset order that respects
// popcount works and every cell gets the same value.
void held_karp_cell(std::uint32_t s, int k, const std::vector<double>& dist, int m,
                    std::vector<double>& dp, std::vector<std::uint8_t>& parent) {
    const std::size_t base = static_cast<std::size_t>(s) * k;
    for (int j = 0; j < k; ++j) {
        if (!(s & (1u << j))) continue;
        const std::uint32_t prev = s & ~(1u << j);
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        const std::size_t prev_base = static_cast<std::size_t>(prev) * k;
        for (int l = 0; l < k; ++l) {
            if (!(prev & (1u << l))) continue;
            const double cand = dp[prev_base + l] + dist[static_cast<std::size_t>(l + 1) * m + (j + 1)];
            if (cand < best) {
                best = cand;
                best_k = l;
            }
        }
        dp[base + j] = best;
        parent[base + j] = static_cast<std::uint8_t>(best_k);
    }
}

}  // namespace

OracleResult held_karp_tsp(const TspInstance& instance, int threads) {
    const int m = static_cast<int>(instance.nodes.size());
    if (m < 2) throw ArgumentError("held_karp_tsp: need at least 2 nodes");
    if (m > 20)
        throw SizeError("held_karp_tsp: " + std::to_string(m) + " nodes exceeds the 20-node cap");
    const std::vector<double> dist = distance_matrix(instance);

    const int k = m - 1;
    const std::uint32_t full = (1u << k) - 1;
    std::vector<double> dp(static_cast<std::size_t>(full + 1) * k,
                           std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> parent(dp.size(), 0);
    for (int j = 0; j < k; ++j)
        dp[static_cast<std::size_t>(1u << j) * k + j] = dist[static_cast<std::size_t>(0) * m + (j + 1)];

    if (threads <= 1) {
        for (std::uint32_t s = 1; s <= full; ++s) {
            if (std::popcount(s) < 2) continue;
            held_karp_cell(s, k, dist, m, dp, parent);
        }
    } else {
        std::vector<std::vector<std::uint32_t>> by_size(k + 1);
        for (std::uint32_t s = 1; s <= full; ++s)
            by_size[std::popcount(s)].push_back(s);
        for (int size = 2; size <= k; ++size) {
            const auto& layer = by_size[size];
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
            for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(layer.size()); ++idx)
                held_karp_cell(layer[idx], k, dist, m, dp, parent);
        }
    }

    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    const std::size_t full_base = static_cast<std::size_t>(full) * k;
    for (int j = 0; j < k; ++j) {
        const double cand = dp[full_base + j] + dist[static_cast<std::size_t>(j + 1) * m];
        if (cand < best) {
            best = cand;
            best_j = j;
        }
    }

    OracleResult result;
    result.optimal = true;
    result.score = best;
    result.nodes_expanded = static_cast<std::uint64_t>(full + 1) * k;
    result.certificate.resize(m);
    std::uint32_t s = full;
    int j = best_j;
    for (int pos = m - 1; pos >= 1; --pos) {
        result.certificate[pos] = j + 1;
        const int pj = parent[static_cast<std::size_t>(s) * k + j];
        s &= ~(1u << j);
        j = pj;
    }
    result.certificate[0] = 0;
    return result;
}

OracleResult brute_force_tsp(const TspInstance& instance) {
    const int m = static_cast<int>(instance.nodes.size());
    if (m < 2) throw ArgumentError("brute_force_tsp: need at least 2 nodes");
    if (m > 10)
        throw SizeError("brute_force_tsp: " + std::to_string(m) + " nodes exceeds the 10-node cap");
    const std::vector<double> dist = distance_matrix(instance);

    std::vector<int> perm(m - 1);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<int> best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t tours = 0;
    do {
        // Each undirected tour appears twice; keep the orientation with the
        // smaller second node.
        if (m > 2 && perm.front() > perm.back()) continue;
        ++tours;
        double length = dist[perm.front()];
        for (int i = 0; i + 1 < m - 1; ++i)
            length += dist[static_cast<std::size_t>(perm[i]) * m + perm[i + 1]];
        length += dist[static_cast<std::size_t>(perm.back()) * m];
        if (length < best) {
            best = length;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    OracleResult result;
    result.optimal = true;
    result.score = best;
    result.nodes_expanded = tours;
    result.certificate.reserve(m);
    result.certificate.push_back(0);
    result.certificate.insert(result.certificate.end(), best_perm.begin(), best_perm.end());
    return result;
}

OracleResult farthest_insertion_tsp(const TspInstance& instance) {
    const int m = static_cast<int>(instance.nodes.size());
    if (m < 3) throw ArgumentError("farthest_insertion_tsp: need at least 3 nodes");
    const std::vector<double> dist = distance_matrix(instance);

    int seed_a = 0, seed_b = 1;
    double far = -1.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (dist[static_cast<std::size_t>(i) * m + j] > far) {
                far = dist[static_cast<std::size_t>(i) * m + j];
                seed_a = i;
                seed_b = j;
            }

    std::vector<int> tour = {seed_a, seed_b};
    std::vector<std::uint8_t> in_tour(m, 0);
    in_tour[seed_a] = in_tour[seed_b] = 1;
    // min_dist[v] tracks the distance from v to its nearest tour node.
    std::vector<double> min_dist(m);
    for (int v = 0; v < m; ++v)
        min_dist[v] = std::min(dist[static_cast<std::size_t>(v) * m + seed_a],
                               dist[static_cast<std::size_t>(v) * m + seed_b]);

    for (int added = 2; added < m; ++added) {
        int pick = -1;
        double pick_dist = -1.0;
        for (int v = 0; v < m; ++v)
            if (!in_tour[v] && min_dist[v] > pick_dist) {
                pick_dist = min_dist[v];
                pick = v;
            }
        int pos = 0;
        double pos_cost = std::numeric_limits<double>::infinity();
        const int tlen = static_cast<int>(tour.size());
        for (int i = 0; i < tlen; ++i) {
            const int a = tour[i];
            const int b = tour[(i + 1) % tlen];
            const double cost = dist[static_cast<std::size_t>(a) * m + pick] +
                                dist[static_cast<std::size_t>(pick) * m + b] -
                                dist[static_cast<std::size_t>(a) * m + b];
            if (cost < pos_cost) {
                pos_cost = cost;
                pos = i + 1;
            }
        }
        tour.insert(tour.begin() + pos, pick);
        in_tour[pick] = 1;
        for (int v = 0; v < m; ++v)
            min_dist[v] = std::min(min_dist[v], dist[static_cast<std::size_t>(v) * m + pick]);
    }

    double length = 0.0;
    for (int i = 0; i < m; ++i)
        length += dist[static_cast<std::size_t>(tour[i]) * m + tour[(i + 1) % m]];

    OracleResult result;
    result.optimal = false;
    result.score = length;
    result.certificate = tour;
    result.nodes_expanded = static_cast<std::uint64_t>(m);
    return result;
}

}  // namespace pomo
