#pragma once

#include <vector>

#include "pomo/instances/types.hpp"

namespace pomo {

// The eight symmetries of the unit square applied to every coordinate
// (CVRP includes the depot). Index 0 is the identity; node indices are
// never permuted, so trajectories transfer between variants unchanged.
// Knapsack has no coordinates: UnsupportedProblem.
std::vector<AnyInstance> augment8(const AnyInstance& instance);

// Single free-form symmetry probe: rotate by `degrees` about (0.5, 0.5),
// scale about the same center, then translate. scale <= 0: ArgumentError.
AnyInstance augment_free(const AnyInstance& instance, double degrees, double scale, double dx,
                         double dy);

}  // namespace pomo
