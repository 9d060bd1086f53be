#pragma once

#include <cstddef>

#include "bohm/types.h"

namespace bohm {

// Deterministic key -> cc partition assignment: FNV-1a(table, key) mod m.
// Stable for the lifetime of a run; every structure that relies on the
// single-writer rule goes through this function.
inline std::size_t partition_of(const RecordKey& key, std::size_t m) {
  return static_cast<std::size_t>(fnv1a(key) % m);
}

}  // namespace bohm
