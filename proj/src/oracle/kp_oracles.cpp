#include <algorithm>
#include <numeric>

#include "pomo/core/error.hpp"
#include "pomo/env/rollout.hpp"
#include "pomo/oracle/oracle.hpp"

namespace pomo {

namespace {

// Item order used by both the greedy heuristic and the branch-and-bound:
// decreasing value/weight ratio, ties by original index.
std::vector<int> ratio_order(const KpInstance& instance) {
    std::vector<int> order(instance.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return instance.items[a].value * instance.items[b].weight >
               instance.items[b].value * instance.items[a].weight;
    });
    return order;
}

struct BnbState {
    const KpInstance* instance;
    const std::vector<int>* order;
    std::uint64_t max_nodes;
    std::uint64_t nodes = 0;
    double best_value = 0.0;
    std::vector<std::uint8_t> chosen;
    std::vector<std::uint8_t> best_chosen;

    // Dantzig bound: fill greedily in ratio order from position pos, counting
    // the first non-fitting item fractionally.
    double bound(std::size_t pos, double value, double room) const {
        for (std::size_t i = pos; i < order->size(); ++i) {
            const KpItem& item = instance->items[(*order)[i]];
            if (item.weight <= room) {
                room -= item.weight;
                value += item.value;
            } else {
                return value + item.value * (room / item.weight);
            }
        }
        return value;
    }

    void dfs(std::size_t pos, double value, double room) {
        if (++nodes > max_nodes)
            throw ResourceError("kp_exact: node budget of " + std::to_string(max_nodes) +
                                " exhausted");
        if (value > best_value) {
            best_value = value;
            best_chosen = chosen;
        }
        if (pos == order->size()) return;
        // The extra eps keeps the bound an upper bound even though the take
        // rule below accepts items within eps of the remaining room.
        if (bound(pos, value, room + kCapacityEps) <= best_value) return;
        const int item = (*order)[pos];
        const KpItem& it = instance->items[item];
        if (it.weight <= room + kCapacityEps) {
            chosen[item] = 1;
            dfs(pos + 1, value + it.value, std::max(0.0, room - it.weight));
            chosen[item] = 0;
        }
        dfs(pos + 1, value, room);
    }
};

}  // namespace

OracleResult kp_exact(const KpInstance& instance, std::uint64_t max_nodes) {
    const int m = static_cast<int>(instance.items.size());
    const std::vector<int> order = ratio_order(instance);
    BnbState state;
    state.instance = &instance;
    state.order = &order;
    state.max_nodes = max_nodes;
    state.chosen.assign(m, 0);
    state.best_chosen.assign(m, 0);
    state.dfs(0, 0.0, instance.capacity);

    OracleResult result;
    result.optimal = true;
    result.score = state.best_value;
    result.nodes_expanded = state.nodes;
    for (int i = 0; i < m; ++i)
        if (state.best_chosen[i]) result.certificate.push_back(i);
    return result;
}

OracleResult kp_enumerate(const KpInstance& instance) {
    const int m = static_cast<int>(instance.items.size());
    if (m > 16)
        throw SizeError("kp_enumerate: " + std::to_string(m) + " items exceeds the 16-item cap");
    double best = 0.0;
    std::uint32_t best_set = 0;
    const std::uint32_t full = (m == 32) ? 0xFFFFFFFFu : ((1u << m) - 1);
    for (std::uint32_t set = 0; set <= full; ++set) {
        double weight = 0.0, value = 0.0;
        for (int i = 0; i < m; ++i)
            if (set & (1u << i)) {
                weight += instance.items[i].weight;
                value += instance.items[i].value;
            }
        if (weight <= instance.capacity + kCapacityEps && value > best) {
            best = value;
            best_set = set;
        }
        if (set == full) break;
    }
    OracleResult result;
    result.optimal = true;
    result.score = best;
    result.nodes_expanded = static_cast<std::uint64_t>(full) + 1;
    for (int i = 0; i < m; ++i)
        if (best_set & (1u << i)) result.certificate.push_back(i);
    return result;
}

OracleResult kp_greedy(const KpInstance& instance) {
    const std::vector<int> order = ratio_order(instance);
    double room = instance.capacity;
    OracleResult result;
    result.optimal = false;
    for (int item : order) {
        if (instance.items[item].weight > room) break;
        room -= instance.items[item].weight;
        result.score += instance.items[item].value;
        result.certificate.push_back(item);
    }
    result.nodes_expanded = instance.items.size();
    return result;
}

}  // namespace pomo
