#include "bohm/core.h"

#include <algorithm>
#include <cstring>

namespace bohm {

namespace {

void require_unique(std::vector<RecordKey> keys, const char* what) {
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw std::invalid_argument(std::string("duplicate key in ") + what);
}

}  // namespace

void Version::publish(std::span<const std::byte> bytes, bool tombstone) {
  instrument::note_shared_write();
  if (!tombstone && !bytes.empty())
    std::memcpy(raw_payload().data(), bytes.data(),
                std::min<std::size_t>(bytes.size(), size_));
  tombstone_ = tombstone;
  published_.store(true, std::memory_order_release);
  producer_.store(nullptr, std::memory_order_release);
}

Transaction::Transaction(std::vector<RecordKey> reads,
                         std::vector<RecordKey> writes, TxnLogic body)
    : read_set(std::move(reads)),
      write_set(std::move(writes)),
      logic(std::move(body)),
      read_refs(read_set.size(), nullptr),
      write_refs(write_set.size(), nullptr) {
  require_unique(read_set, "read set");
  require_unique(write_set, "write set");
}

std::size_t Transaction::op_count() const {
  std::size_t n = read_set.size();
  for (const auto& w : write_set)
    if (std::find(read_set.begin(), read_set.end(), w) == read_set.end()) ++n;
  return n;
}

void append_observed(Payload& out, const ReadValue& value) {
  out.push_back(std::byte{value.found ? std::uint8_t{1} : std::uint8_t{0}});
  if (!value.found) return;
  auto len = static_cast<std::uint32_t>(value.bytes.size());
  const auto* lp = reinterpret_cast<const std::byte*>(&len);
  out.insert(out.end(), lp, lp + sizeof(len));
  out.insert(out.end(), value.bytes.begin(), value.bytes.end());
}

std::uint64_t digest(const DbState& state) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : state) {
    mix(&k.table, sizeof(k.table));
    mix(&k.key, sizeof(k.key));
    std::uint64_t len = v.size();
    mix(&len, sizeof(len));
    mix(v.data(), v.size());
  }
  return h;
}

}  // namespace bohm
