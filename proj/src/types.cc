#include "bohm/types.h"

namespace bohm {

std::uint64_t fnv1a(const RecordKey& k) {
  constexpr std::uint64_t kOffset = 14695981039346656037ull;
  constexpr std::uint64_t kPrime = 1099511628211ull;
  std::uint64_t h = kOffset;
  for (int i = 0; i < 4; ++i) {
    h ^= (k.table >> (8 * i)) & 0xff;
    h *= kPrime;
  }
  for (int i = 0; i < 8; ++i) {
    h ^= (k.key >> (8 * i)) & 0xff;
    h *= kPrime;
  }
  return h;
}

}  // namespace bohm
