#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>

#include "bohm/core.h"
#include "bohm/partition.h"
#include "bohm/storage.h"

namespace bohm {

// Counting barrier over the m cc threads. Each thread keeps its own sense
// flag; the last arriver runs the completion callback, then flips the
// shared sense to release the others.
class SenseBarrier {
 public:
  explicit SenseBarrier(std::size_t parties)
      : parties_(parties), remaining_(parties) {}

  template <typename F>
  bool arrive_and_wait(bool& local_sense, F&& on_complete) {
    local_sense = !local_sense;
    if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
      remaining_.store(parties_, std::memory_order_relaxed);
      on_complete();
      sense_.store(local_sense, std::memory_order_release);
      sense_.notify_all();
      return true;
    }
    for (int i = 0; i < 128; ++i) {
      if (sense_.load(std::memory_order_acquire) == local_sense) return false;
    }
    while (sense_.load(std::memory_order_acquire) != local_sense)
      sense_.wait(!local_sense, std::memory_order_acquire);
    return false;
  }

  std::size_t parties() const { return parties_; }

 private:
  const std::size_t parties_;
  std::atomic<std::size_t> remaining_;
  std::atomic<bool> sense_{false};
};

struct CcStats {
  std::uint64_t installed = 0;
  std::uint64_t annotated = 0;
  std::uint64_t reclaimed = 0;
};

// A superseded version waiting for the low watermark to pass the batch
// that superseded it.
struct DeferredVersion {
  Version* old = nullptr;
  Version* successor = nullptr;
  BatchId superseded_in = 0;
};

// State owned by one concurrency-control thread: the latest-version table
// for its keys, its version pool and its GC defer list. Nothing here is
// touched by any other thread.
class CcPartition {
 public:
  CcPartition(std::uint32_t id, Storage& storage, bool annotate_reads);

  std::uint32_t id() const { return id_; }
  bool owns(const RecordKey& key) const {
    return partition_of(key, partitions_) == id_;
  }

  // New placeholder {begin=txn.ts, end=INF, producer=txn, prev=old head};
  // the old head's end_ts becomes txn.ts and it joins the defer list.
  Version* install_placeholder(const RecordKey& key, Transaction& txn,
                               std::size_t write_index, BatchId batch);

  // Stores the current head (or null) in txn.read_refs[read_index]. Does not
  // record the read anywhere else.
  void annotate_read(const RecordKey& key, Transaction& txn,
                     std::size_t read_index);

  // For each transaction in order: annotate owned reads, then install owned
  // writes. Reads go first so an RMW's read ref is its predecessor.
  void process_batch(Batch& batch);

  // Releases every deferred version superseded in a batch <= low_watermark
  // and cuts the successor's prev link. With `poison`, versions are marked
  // and kept instead of recycled.
  std::size_t gc_reclaim(BatchId low_watermark, bool poison);

  const CcStats& stats() const { return stats_; }
  std::size_t deferred_count() const { return defer_.size(); }

  // Test hook, called for each version just before it is released.
  void set_reclaim_observer(std::function<void(const Version&)> fn) {
    on_reclaim_ = std::move(fn);
  }

 private:
  IndexEntry* lookup(const RecordKey& key);

  std::uint32_t id_;
  std::size_t partitions_;
  Storage& storage_;
  VersionPool& pool_;
  bool annotate_reads_;
  std::unordered_map<RecordKey, IndexEntry*, RecordKeyHash> latest_;
  std::deque<DeferredVersion> defer_;
  std::vector<Version*> graveyard_;
  CcStats stats_;
  std::function<void(const Version&)> on_reclaim_;
};

}  // namespace bohm
