#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// Standalone feasibility checkers, deliberately written apart from the
// rollout and return code so the two can cross-validate each other. They
// return a description of the first violation, or nullopt when feasible.
std::optional<std::string> check_tsp_tour(const TspInstance& instance,
                                          const std::vector<int>& actions);
std::optional<std::string> check_cvrp_route(const CvrpInstance& instance,
                                            const std::vector<int>& actions);
std::optional<std::string> check_kp_selection(const KpInstance& instance,
                                              const std::vector<int>& actions);

std::optional<std::string> check_feasible(const AnyInstance& instance,
                                          const std::vector<int>& actions);

// Debug dump line: "instance_id; start_node; a_1,...,a_T; return".
std::string trajectory_line(std::uint64_t instance_id, const std::vector<int>& actions,
                            double return_value);

}  // namespace pomo
