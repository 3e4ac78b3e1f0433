#include "pomo/env/validate.hpp"

#include <variant>

#include "pomo/core/io.hpp"
#include "pomo/env/rollout.hpp"

namespace pomo {

std::optional<std::string> check_tsp_tour(const TspInstance& instance,
                                          const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.nodes.size());
    if (static_cast<int>(actions.size()) != m)
        return "tour has " + std::to_string(actions.size()) + " actions for " +
               std::to_string(m) + " nodes";
    std::vector<int> count(m, 0);
    for (int a : actions) {
        if (a < 0 || a >= m) return "node index " + std::to_string(a) + " out of range";
        ++count[a];
    }
    for (int j = 0; j < m; ++j) {
        if (count[j] == 0) return "node " + std::to_string(j) + " never visited";
        if (count[j] > 1) return "node " + std::to_string(j) + " visited " +
                                 std::to_string(count[j]) + " times";
    }
    return std::nullopt;
}

std::optional<std::string> check_cvrp_route(const CvrpInstance& instance,
                                            const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.customers.size());
    std::vector<int> count(m, 0);
    double load = 0.0;
    int segment = 0;
    for (int a : actions) {
        if (a < 0 || a > m) return "action " + std::to_string(a) + " out of range";
        if (a == 0) {
            load = 0.0;
            ++segment;
            continue;
        }
        const int customer = a - 1;
        ++count[customer];
        if (count[customer] > 1)
            return "customer " + std::to_string(customer) + " served twice";
        load += instance.demands[customer];
        if (load > instance.vehicle_capacity + kCapacityEps)
            return "segment " + std::to_string(segment) + " load " + std::to_string(load) +
                   " exceeds capacity";
    }
    for (int j = 0; j < m; ++j)
        if (count[j] == 0) return "customer " + std::to_string(j) + " never served";
    return std::nullopt;
}

std::optional<std::string> check_kp_selection(const KpInstance& instance,
                                              const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.items.size());
    std::vector<int> count(m, 0);
    double weight = 0.0;
    for (int a : actions) {
        if (a < 0 || a > m) return "action " + std::to_string(a) + " out of range";
        if (a == m) continue;
        ++count[a];
        if (count[a] > 1) return "item " + std::to_string(a) + " selected twice";
        weight += instance.items[a].weight;
    }
    if (weight > instance.capacity + kCapacityEps)
        return "selection weight " + std::to_string(weight) + " exceeds capacity " +
               std::to_string(instance.capacity);
    return std::nullopt;
}

std::optional<std::string> check_feasible(const AnyInstance& instance,
                                          const std::vector<int>& actions) {
    return std::visit(
        [&](const auto& inst) -> std::optional<std::string> {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, TspInstance>)
                return check_tsp_tour(inst, actions);
            else if constexpr (std::is_same_v<T, CvrpInstance>)
                return check_cvrp_route(inst, actions);
            else
                return check_kp_selection(inst, actions);
        },
        instance);
}

std::string trajectory_line(std::uint64_t instance_id, const std::vector<int>& actions,
                            double return_value) {
    std::string line = std::to_string(instance_id);
    line += "; ";
    line += actions.empty() ? "-" : std::to_string(actions.front());
    line += "; ";
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i > 0) line += ',';
        line += std::to_string(actions[i]);
    }
    line += "; ";
    line += format_double(return_value);
    return line;
}

}  // namespace pomo
