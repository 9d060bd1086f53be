#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "bohm/instrument.h"
#include "bohm/types.h"

namespace bohm {

struct Transaction;

// One version of a record. The payload lives inline after the object, so
// versions are created through a VersionPool rather than `new`.
//
// begin_ts/end_ts/prev are metadata owned by the key's cc partition. The
// payload, tombstone flag, published flag and producer are written once by
// whichever exec thread runs the producing transaction.
class Version {
 public:
  Version(RecordKey key, Timestamp begin, Transaction* producer, Version* prev,
          std::uint32_t payload_size, std::uint32_t owner)
      : key_(key),
        begin_(begin),
        end_(kInfinity),
        prev_(prev),
        producer_(producer),
        published_(producer == nullptr),
        size_(payload_size),
        owner_(owner) {}

  Version(const Version&) = delete;
  Version& operator=(const Version&) = delete;

  static std::size_t footprint(std::uint32_t payload_size) {
    return sizeof(Version) + payload_size;
  }

  const RecordKey& key() const { return key_; }
  Timestamp begin_ts() const { return begin_.load(std::memory_order_relaxed); }
  Timestamp end_ts() const { return end_.load(std::memory_order_relaxed); }
  Version* prev() const { return prev_.load(std::memory_order_acquire); }
  Transaction* producer() const {
    return producer_.load(std::memory_order_acquire);
  }
  bool published() const { return published_.load(std::memory_order_acquire); }
  // Only meaningful once published() has returned true.
  bool tombstone() const { return tombstone_; }
  std::uint32_t size() const { return size_; }
  std::uint32_t owner() const { return owner_; }
  bool poisoned() const { return poisoned_.load(std::memory_order_relaxed); }

  std::span<const std::byte> payload() const {
    return {reinterpret_cast<const std::byte*>(this + 1), size_};
  }
  std::span<std::byte> raw_payload() {
    return {reinterpret_cast<std::byte*>(this + 1), size_};
  }

  void set_end_ts(Timestamp ts) {
    instrument::note_metadata_write(owner_);
    end_.store(ts, std::memory_order_relaxed);
  }
  void set_prev(Version* v) {
    instrument::note_metadata_write(owner_);
    prev_.store(v, std::memory_order_release);
  }

  // Fills the placeholder and makes it readable. Release ordering on the
  // published flag pairs with the acquire in published().
  void publish(std::span<const std::byte> bytes, bool tombstone);

  void poison() { poisoned_.store(true, std::memory_order_relaxed); }

 private:
  RecordKey key_;
  std::atomic<Timestamp> begin_;
  std::atomic<Timestamp> end_;
  std::atomic<Version*> prev_;
  std::atomic<Transaction*> producer_;
  std::atomic<bool> published_;
  std::atomic<bool> poisoned_{false};
  bool tombstone_ = false;
  std::uint32_t size_;
  std::uint32_t owner_;
};

static_assert(sizeof(Version) % 8 == 0, "payload must stay 8-byte aligned");

// Raw visibility predicate: begin_ts <= ts <= end_ts. Matches twice at a
// boundary shared by adjacent versions; resolve_read picks the older one.
inline bool visible(const Version& v, Timestamp ts) {
  return v.begin_ts() <= ts && v.end_ts() >= ts;
}

enum class TxnState : std::uint32_t { kUnprocessed, kExecuting, kComplete };

struct Transaction {
  // Throws std::invalid_argument if either set repeats a key.
  Transaction(std::vector<RecordKey> reads, std::vector<RecordKey> writes,
              TxnLogic body);

  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  Timestamp ts = 0;
  std::vector<RecordKey> read_set;
  std::vector<RecordKey> write_set;
  TxnLogic logic;
  std::atomic<TxnState> state{TxnState::kUnprocessed};

  // Filled by the cc layer before the batch is released to execution.
  std::vector<Version*> read_refs;
  std::vector<Version*> write_refs;

  // Outcome of the execution that completed the transaction.
  Payload observed;
  bool aborted = false;

  // Distinct records touched: reads plus writes that are not also reads.
  std::size_t op_count() const;
};

// Encoding of recorded read values: per read, one flag byte (1 = found),
// then a 4-byte length and the bytes when found. Shared by every engine and
// by the serial replay oracle so observations compare byte for byte.
void append_observed(Payload& out, const ReadValue& value);

// Committed contents of a database: live (non-tombstone) records only.
using DbState = std::map<RecordKey, Payload>;

// FNV-1a over (table, key, length, bytes) of every record in key order.
std::uint64_t digest(const DbState& state);

struct Batch {
  BatchId id = 0;
  Timestamp base_ts = 0;
  std::vector<std::unique_ptr<Transaction>> txns;
};

}  // namespace bohm
