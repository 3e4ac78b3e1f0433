#include "pomo/instances/types.hpp"

#include <cmath>

namespace pomo {

const char* to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::kTsp: return "tsp";
        case ProblemKind::kCvrp: return "cvrp";
        case ProblemKind::kKp: return "kp";
    }
    return "?";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "tsp") return ProblemKind::kTsp;
    if (name == "cvrp") return ProblemKind::kCvrp;
    if (name == "kp") return ProblemKind::kKp;
    throw ArgumentError("unknown problem kind: '" + name + "' (expected tsp|cvrp|kp)");
}

ProblemKind kind_of(const AnyInstance& instance) {
    return static_cast<ProblemKind>(instance.index());
}

int instance_size(const AnyInstance& instance) {
    return std::visit([](const auto& inst) { return inst.size(); }, instance);
}

namespace {

void check_unit_coord(const Coord& c, const char* what) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y))
        throw ArgumentError(std::string(what) + ": non-finite coordinate");
    if (c.x < 0.0 || c.x > 1.0 || c.y < 0.0 || c.y > 1.0)
        throw ArgumentError(std::string(what) + ": coordinate outside the unit square");
}

}  // namespace

void validate(const TspInstance& instance) {
    if (instance.size() < 2) throw ArgumentError("tsp instance needs at least 2 nodes");
    for (const auto& node : instance.nodes) check_unit_coord(node, "tsp node");
}

void validate(const CvrpInstance& instance) {
    if (instance.size() < 1) throw ArgumentError("cvrp instance needs at least 1 customer");
    if (instance.customers.size() != instance.demands.size())
        throw ArgumentError("cvrp customers/demands length mismatch");
    if (instance.vehicle_capacity <= 0.0)
        throw ArgumentError("cvrp vehicle capacity must be positive");
    check_unit_coord(instance.depot, "cvrp depot");
    for (const auto& c : instance.customers) check_unit_coord(c, "cvrp customer");
    for (double d : instance.demands) {
        if (!(d > 0.0) || d > instance.vehicle_capacity)
            throw ArgumentError("cvrp demand outside (0, capacity]");
    }
}

void validate(const KpInstance& instance) {
    if (instance.size() < 1) throw ArgumentError("kp instance needs at least 1 item");
    if (!(instance.capacity > 0.0)) throw ArgumentError("kp capacity must be positive");
    for (const auto& item : instance.items) {
        if (!std::isfinite(item.weight) || !std::isfinite(item.value))
            throw ArgumentError("kp item: non-finite weight/value");
        if (item.weight <= 0.0 || item.weight >= 1.0 || item.value <= 0.0 || item.value >= 1.0)
            throw ArgumentError("kp item weight/value outside (0, 1)");
    }
}

void validate(const AnyInstance& instance) {
    std::visit([](const auto& inst) { validate(inst); }, instance);
}

}  // namespace pomo
