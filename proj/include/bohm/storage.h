#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bohm/core.h"

namespace bohm {

class DuplicateKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Allocates versions with inline payloads for one partition. Not
// thread-safe: only the partition's cc thread (or the loader before start)
// touches it. Recycled blocks are reused for versions of the same size.
class VersionPool {
 public:
  explicit VersionPool(std::uint32_t owner) : owner_(owner) {}
  ~VersionPool();
  VersionPool(const VersionPool&) = delete;
  VersionPool& operator=(const VersionPool&) = delete;
  VersionPool(VersionPool&&) noexcept;

  Version* create(const RecordKey& key, Timestamp begin, Transaction* producer,
                  Version* prev, std::uint32_t payload_size);
  void recycle(Version* v);

  std::size_t allocated() const { return blocks_.size(); }
  std::size_t free_blocks() const;

 private:
  std::uint32_t owner_;
  std::vector<void*> blocks_;
  std::unordered_map<std::uint32_t, std::vector<void*>> free_;
};

struct IndexEntry {
  RecordKey key;
  std::atomic<Version*> head{nullptr};
  IndexEntry* next = nullptr;  // immutable once the entry is linked
  std::uint32_t owner = 0;
};

// Latch-free hash index RecordKey -> version chain head. Fixed bucket count;
// entries are pushed onto bucket lists with CAS and never removed. Each
// entry's head has a single writer (the owning partition); readers only
// load.
class TableIndex {
 public:
  explicit TableIndex(std::size_t expected_keys);
  ~TableIndex();
  TableIndex(const TableIndex&) = delete;
  TableIndex& operator=(const TableIndex&) = delete;

  Version* get(const RecordKey& key) const;
  IndexEntry* find(const RecordKey& key) const;

  // Points key's entry at `v`, creating the entry if absent. `v->prev()`
  // must already reference the prior head.
  IndexEntry* install(const RecordKey& key, Version* v, std::uint32_t owner);
  static void install(IndexEntry& entry, Version* v);

  std::size_t bucket_count() const { return mask_ + 1; }
  std::size_t size() const { return size_.load(std::memory_order_relaxed); }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t b = 0; b <= mask_; ++b)
      for (auto* e = buckets_[b].load(std::memory_order_acquire); e;
           e = e->next)
        f(*e);
  }

 private:
  std::atomic<IndexEntry*>& bucket(const RecordKey& key) const;

  std::size_t mask_;
  std::unique_ptr<std::atomic<IndexEntry*>[]> buckets_;
  std::atomic<std::size_t> size_{0};
};

struct TableInfo {
  TableId id = 0;
  std::uint32_t record_size = 0;
  std::unique_ptr<TableIndex> index;
};

using Record = std::pair<std::uint64_t, Payload>;

// Table catalog, per-table indexes and the per-partition version pools.
class Storage {
 public:
  explicit Storage(std::size_t partitions);

  void create_table(TableId id, std::uint32_t record_size,
                    std::size_t expected_keys);
  bool has_table(TableId id) const;
  const TableInfo& table(TableId id) const;
  TableIndex& index(TableId id) { return *table_mut(id).index; }
  const TableIndex& index(TableId id) const { return *table(id).index; }
  std::uint32_t record_size(TableId id) const { return table(id).record_size; }

  std::size_t partitions() const { return pools_.size(); }
  VersionPool& pool(std::size_t p) { return pools_[p]; }

  // Before the engine starts. Each record becomes a published version with
  // begin_ts 0. Throws DuplicateKey (and loads nothing) if a key repeats or
  // already exists.
  void bulk_load(TableId id, std::span<const Record> records);

  Version* index_get(const RecordKey& key) const {
    return table(key.table).index->get(key);
  }

  // Head payloads of every chain; tombstoned and unpublished heads are
  // skipped. Only meaningful at quiescence.
  DbState snapshot() const;

 private:
  TableInfo& table_mut(TableId id);

  std::vector<TableInfo> tables_;
  std::vector<VersionPool> pools_;
};

}  // namespace bohm
