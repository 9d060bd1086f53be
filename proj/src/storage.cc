#include "bohm/storage.h"

#include <algorithm>
#include <bit>
#include <new>
#include <string>

#include "bohm/partition.h"

namespace bohm {

VersionPool::~VersionPool() {
  for (void* b : blocks_) ::operator delete(b);
}

VersionPool::VersionPool(VersionPool&& other) noexcept
    : owner_(other.owner_),
      blocks_(std::move(other.blocks_)),
      free_(std::move(other.free_)) {
  other.blocks_.clear();
}

Version* VersionPool::create(const RecordKey& key, Timestamp begin,
                             Transaction* producer, Version* prev,
                             std::uint32_t payload_size) {
  void* block = nullptr;
  auto it = free_.find(payload_size);
  if (it != free_.end() && !it->second.empty()) {
    block = it->second.back();
    it->second.pop_back();
  } else {
    block = ::operator new(Version::footprint(payload_size));
    blocks_.push_back(block);
  }
  return new (block) Version(key, begin, producer, prev, payload_size, owner_);
}

void VersionPool::recycle(Version* v) {
  free_[v->size()].push_back(v);
}

std::size_t VersionPool::free_blocks() const {
  std::size_t n = 0;
  for (const auto& [size, list] : free_) n += list.size();
  return n;
}

TableIndex::TableIndex(std::size_t expected_keys) {
  std::size_t want = std::bit_ceil(std::max<std::size_t>(2 * expected_keys, 16));
  mask_ = want - 1;
  buckets_ = std::make_unique<std::atomic<IndexEntry*>[]>(want);
  for (std::size_t i = 0; i < want; ++i)
    buckets_[i].store(nullptr, std::memory_order_relaxed);
}

TableIndex::~TableIndex() {
  for (std::size_t b = 0; b <= mask_; ++b) {
    auto* e = buckets_[b].load(std::memory_order_relaxed);
    while (e) {
      auto* next = e->next;
      delete e;
      e = next;
    }
  }
}

std::atomic<IndexEntry*>& TableIndex::bucket(const RecordKey& key) const {
  // High bits: the low bits of FNV-1a also pick the cc partition.
  std::uint64_t h = fnv1a(key);
  return buckets_[(h ^ (h >> 29)) & mask_];
}

IndexEntry* TableIndex::find(const RecordKey& key) const {
  for (auto* e = bucket(key).load(std::memory_order_acquire); e; e = e->next)
    if (e->key == key) return e;
  return nullptr;
}

Version* TableIndex::get(const RecordKey& key) const {
  auto* e = find(key);
  return e ? e->head.load(std::memory_order_acquire) : nullptr;
}

void TableIndex::install(IndexEntry& entry, Version* v) {
  instrument::note_metadata_write(entry.owner);
  entry.head.store(v, std::memory_order_release);
}

IndexEntry* TableIndex::install(const RecordKey& key, Version* v,
                                std::uint32_t owner) {
  if (auto* e = find(key)) {
    install(*e, v);
    return e;
  }
  instrument::note_shared_write();
  auto* e = new IndexEntry;
  e->key = key;
  e->owner = owner;
  e->head.store(v, std::memory_order_relaxed);
  auto& head = bucket(key);
  auto* first = head.load(std::memory_order_relaxed);
  do {
    e->next = first;
  } while (!head.compare_exchange_weak(first, e, std::memory_order_release,
                                       std::memory_order_relaxed));
  size_.fetch_add(1, std::memory_order_relaxed);
  return e;
}

Storage::Storage(std::size_t partitions) {
  if (partitions == 0) throw ConfigError("storage needs at least one partition");
  pools_.reserve(partitions);
  for (std::size_t p = 0; p < partitions; ++p)
    pools_.emplace_back(static_cast<std::uint32_t>(p));
}

void Storage::create_table(TableId id, std::uint32_t record_size,
                           std::size_t expected_keys) {
  if (has_table(id))
    throw ConfigError("table " + std::to_string(id) + " already exists");
  if (tables_.size() <= id) tables_.resize(id + 1);
  tables_[id].id = id;
  tables_[id].record_size = record_size;
  tables_[id].index = std::make_unique<TableIndex>(expected_keys);
}

bool Storage::has_table(TableId id) const {
  return id < tables_.size() && tables_[id].index != nullptr;
}

const TableInfo& Storage::table(TableId id) const {
  if (!has_table(id))
    throw std::out_of_range("unknown table " + std::to_string(id));
  return tables_[id];
}

TableInfo& Storage::table_mut(TableId id) {
  if (!has_table(id))
    throw std::out_of_range("unknown table " + std::to_string(id));
  return tables_[id];
}

void Storage::bulk_load(TableId id, std::span<const Record> records) {
  auto& info = table_mut(id);
  std::vector<std::uint64_t> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back(r.first);
  std::sort(keys.begin(), keys.end());
  auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end())
    throw DuplicateKey("duplicate key " + std::to_string(*dup) +
                       " in load set for table " + std::to_string(id));
  for (auto k : keys)
    if (info.index->find(RecordKey{id, k}))
      throw DuplicateKey("key " + std::to_string(k) +
                         " already loaded in table " + std::to_string(id));

  auto saved = instrument::current_partition();
  for (const auto& [k, bytes] : records) {
    RecordKey key{id, k};
    auto p = static_cast<std::uint32_t>(partition_of(key, pools_.size()));
    instrument::set_current_partition(p);
    Version* v = pools_[p].create(key, 0, nullptr, nullptr, info.record_size);
    auto dst = v->raw_payload();
    std::fill(dst.begin(), dst.end(), std::byte{0});
    std::copy_n(bytes.begin(), std::min(bytes.size(), dst.size()), dst.begin());
    info.index->install(key, v, p);
  }
  instrument::set_current_partition(saved);
}

DbState Storage::snapshot() const {
  DbState state;
  for (const auto& t : tables_) {
    if (!t.index) continue;
    t.index->for_each([&](const IndexEntry& e) {
      const Version* v = e.head.load(std::memory_order_acquire);
      if (!v || !v->published() || v->tombstone()) return;
      auto bytes = v->payload();
      state.emplace(e.key, Payload(bytes.begin(), bytes.end()));
    });
  }
  return state;
}

}  // namespace bohm
