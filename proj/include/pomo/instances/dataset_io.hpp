#pragma once

#include <string>

#include "pomo/instances/types.hpp"

namespace pomo {

// Binary layout (all integers little-endian, all reals IEEE-754 f64 LE):
//   magic   "POMODS1" (7 bytes)
//   kind    u8
//   count   u64
//   seed    u64
//   records count x instance payload
// Payloads:
//   tsp:  m u32, then m pairs (x, y)
//   cvrp: m u32, capacity f64, depot (x, y), then m triples (x, y, demand)
//   kp:   m u32, capacity f64, then m pairs (weight, value)
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// One JSON object per line; field order is fixed so the mirror is reproducible.
void save_dataset_jsonl(const Dataset& ds, const std::string& path);
Dataset load_dataset_jsonl(const std::string& path);

// Throws SchemaError when the dataset on disk holds a different problem kind.
Dataset load_dataset_expect(const std::string& path, ProblemKind expected);

}  // namespace pomo
