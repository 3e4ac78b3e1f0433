#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pomo/core/error.hpp"

namespace pomo {

enum class ProblemKind : std::uint8_t { kTsp = 0, kCvrp = 1, kKp = 2 };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct Coord {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Coord&) const = default;
};

inline double euclid(const Coord& a, const Coord& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct TspInstance {
    std::vector<Coord> nodes;

    int size() const { return static_cast<int>(nodes.size()); }
    bool operator==(const TspInstance&) const = default;
};

// Customer demands are already normalized by the divisor D, so the vehicle
// capacity is always 1.
struct CvrpInstance {
    Coord depot;
    std::vector<Coord> customers;
    std::vector<double> demands;
    double vehicle_capacity = 1.0;

    int size() const { return static_cast<int>(customers.size()); }
    bool operator==(const CvrpInstance&) const = default;
};

struct KpItem {
    double weight = 0.0;
    double value = 0.0;

    bool operator==(const KpItem&) const = default;
};

struct KpInstance {
    std::vector<KpItem> items;
    double capacity = 0.0;

    int size() const { return static_cast<int>(items.size()); }
    bool operator==(const KpInstance&) const = default;
};

using AnyInstance = std::variant<TspInstance, CvrpInstance, KpInstance>;

ProblemKind kind_of(const AnyInstance& instance);

// Number of nodes/customers/items.
int instance_size(const AnyInstance& instance);

// Throw ArgumentError if the instance violates its documented invariants
// (coordinates inside the unit square, demands below capacity, ...).
void validate(const TspInstance& instance);
void validate(const CvrpInstance& instance);
void validate(const KpInstance& instance);
void validate(const AnyInstance& instance);

struct Dataset {
    ProblemKind kind = ProblemKind::kTsp;
    std::uint64_t seed = 0;
    std::vector<AnyInstance> instances;

    int size() const { return static_cast<int>(instances.size()); }
};

}  // namespace pomo
