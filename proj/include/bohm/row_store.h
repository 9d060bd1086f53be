#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>

#include "bohm/core.h"
#include "bohm/sync.h"

namespace bohm {

enum class LockMode : std::uint8_t { kShared, kExclusive };

struct Row;

// One pending or granted lock request. Owned by the requesting worker and
// allocated before the transaction starts acquiring.
struct LockRequest {
  LockMode mode = LockMode::kShared;
  std::atomic<bool> granted{false};
  LockRequest* next = nullptr;
  Row* row = nullptr;
};

// FIFO request queue of one record. Guarded by the row's bucket latch.
struct LockHead {
  LockRequest* first = nullptr;
  LockRequest* last = nullptr;
};

// Single-version, update-in-place record slot shared by the baselines.
// Data is held in 64-bit words accessed atomically so optimistic readers
// never race in the C++ sense.
struct Row {
  Row(const RecordKey& k, std::uint32_t record_size, std::size_t bucket_index);

  RecordKey key;
  std::uint32_t size;
  std::size_t bucket;
  Row* next = nullptr;  // bucket chain, immutable once linked

  // OCC version word: commit id, top bit is the write lock.
  std::atomic<std::uint64_t> tid{0};
  std::atomic<bool> present{false};
  std::unique_ptr<std::atomic<std::uint64_t>[]> words;

  LockHead lock;  // 2PL only

  void read_into(std::span<std::byte> out) const;
  void write_from(std::span<const std::byte> in);
};

class RowStore {
 public:
  explicit RowStore(std::size_t expected_keys);
  ~RowStore();
  RowStore(const RowStore&) = delete;
  RowStore& operator=(const RowStore&) = delete;

  Row* find(const RecordKey& key) const;
  // Creates an absent (present == false) row when missing.
  Row* get_or_create(const RecordKey& key, std::uint32_t record_size);

  SpinLatch& latch(const Row& row) const { return buckets_[row.bucket].latch; }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t b = 0; b <= mask_; ++b)
      for (Row* r = buckets_[b].head.load(std::memory_order_acquire); r;
           r = r->next)
        f(*r);
  }

 private:
  struct alignas(64) Bucket {
    SpinLatch latch;
    std::atomic<Row*> head{nullptr};
  };

  std::size_t index_of(const RecordKey& key) const;

  std::size_t mask_;
  std::unique_ptr<Bucket[]> buckets_;
};

}  // namespace bohm
