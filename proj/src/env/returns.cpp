#include "pomo/env/returns.hpp"

#include <string>

#include "pomo/core/error.hpp"
#include "pomo/env/rollout.hpp"

namespace pomo {

double tsp_return(const TspInstance& instance, const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.nodes.size());
    if (static_cast<int>(actions.size()) != m)
        throw ContractViolation("tsp_return: expected " + std::to_string(m) + " actions, got " +
                                std::to_string(actions.size()));
    std::vector<std::uint8_t> seen(m, 0);
    for (int a : actions) {
        if (a < 0 || a >= m)
            throw ContractViolation("tsp_return: action " + std::to_string(a) + " out of range");
        if (seen[a])
            throw ContractViolation("tsp_return: node " + std::to_string(a) + " visited twice");
        seen[a] = 1;
    }
    double length = 0.0;
    for (int i = 0; i < m; ++i)
        length += euclid(instance.nodes[actions[i]], instance.nodes[actions[(i + 1) % m]]);
    return -length;
}

double cvrp_return(const CvrpInstance& instance, const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.customers.size());
    const double cap = instance.vehicle_capacity;
    std::vector<std::uint8_t> served(m, 0);
    int served_count = 0;
    double length = 0.0;
    double load = 0.0;
    Coord pos = instance.depot;
    int segment = 0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const int a = actions[i];
        if (a < 0 || a > m)
            throw ContractViolation("cvrp_return: action " + std::to_string(a) + " out of range");
        if (a == 0) {
            length += euclid(pos, instance.depot);
            pos = instance.depot;
            load = 0.0;
            ++segment;
            continue;
        }
        const int customer = a - 1;
        if (served[customer])
            throw ContractViolation("cvrp_return: customer " + std::to_string(customer) +
                                    " served twice");
        load += instance.demands[customer];
        if (load > cap + kCapacityEps)
            throw ContractViolation("cvrp_return: capacity exceeded on segment " +
                                    std::to_string(segment) + " at customer " +
                                    std::to_string(customer));
        length += euclid(pos, instance.customers[customer]);
        pos = instance.customers[customer];
        served[customer] = 1;
        ++served_count;
    }
    if (served_count != m)
        throw ContractViolation("cvrp_return: " + std::to_string(m - served_count) +
                                " customers never served");
    length += euclid(pos, instance.depot);
    return -length;
}

double kp_return(const KpInstance& instance, const std::vector<int>& actions) {
    const int m = static_cast<int>(instance.items.size());
    std::vector<std::uint8_t> taken(m, 0);
    double weight = 0.0;
    double value = 0.0;
    for (int a : actions) {
        if (a < 0 || a > m)
            throw ContractViolation("kp_return: action " + std::to_string(a) + " out of range");
        if (a == m) continue;
        if (taken[a])
            throw ContractViolation("kp_return: item " + std::to_string(a) + " selected twice");
        taken[a] = 1;
        weight += instance.items[a].weight;
        value += instance.items[a].value;
    }
    if (weight > instance.capacity + kCapacityEps)
        throw ContractViolation("kp_return: total weight " + std::to_string(weight) +
                                " exceeds capacity " + std::to_string(instance.capacity));
    return value;
}

}  // namespace pomo
