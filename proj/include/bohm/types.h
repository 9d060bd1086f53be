#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bohm {

// A transaction's position in the global log. Doubles as version bounds.
using Timestamp = std::uint64_t;
inline constexpr Timestamp kInfinity = std::numeric_limits<Timestamp>::max();

using TableId = std::uint32_t;
using BatchId = std::uint64_t;
using Payload = std::vector<std::byte>;

struct RecordKey {
  TableId table = 0;
  std::uint64_t key = 0;

  friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
  friend bool operator==(const RecordKey&, const RecordKey&) = default;
};

// FNV-1a 64 over the 4 little-endian table bytes followed by the 8
// little-endian key bytes.
std::uint64_t fnv1a(const RecordKey& k);

struct RecordKeyHash {
  std::size_t operator()(const RecordKey& k) const noexcept {
    return static_cast<std::size_t>(fnv1a(k));
  }
};

// A resolved read as seen by transaction logic. `found == false` means
// NotFound: no visible version, or the visible version is a tombstone.
struct ReadValue {
  std::span<const std::byte> bytes;
  bool found = false;
};

// Destination for one write-set key. Logic fills `bytes` (sized to the
// table's record size) or sets `tombstone` to delete the record.
struct WriteValue {
  std::span<std::byte> bytes;
  bool tombstone = false;
};

enum class Outcome { kCommit, kAbort };

// Deterministic transaction body: a pure function of the resolved reads.
// reads[i] corresponds to read_set[i], writes[j] to write_set[j].
using TxnLogic = std::function<Outcome(std::span<const ReadValue> reads,
                                       std::span<WriteValue> writes)>;

inline std::int64_t load_i64(std::span<const std::byte> bytes) {
  std::int64_t v = 0;
  std::memcpy(&v, bytes.data(), sizeof(v));
  return v;
}

inline void store_i64(std::span<std::byte> bytes, std::int64_t v) {
  std::memcpy(bytes.data(), &v, sizeof(v));
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bohm
