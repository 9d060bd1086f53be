#include "bohm/row_store.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>

namespace bohm {

Row::Row(const RecordKey& k, std::uint32_t record_size, std::size_t bucket_index)
    : key(k),
      size(record_size),
      bucket(bucket_index),
      words(std::make_unique<std::atomic<std::uint64_t>[]>((record_size + 7) / 8)) {
  for (std::size_t i = 0; i < (size + 7) / 8; ++i)
    words[i].store(0, std::memory_order_relaxed);
}

void Row::read_into(std::span<std::byte> out) const {
  const std::size_t n = std::min<std::size_t>(out.size(), size);
  for (std::size_t off = 0, w = 0; off < n; off += 8, ++w) {
    std::uint64_t v = words[w].load(std::memory_order_relaxed);
    std::memcpy(out.data() + off, &v, std::min<std::size_t>(8, n - off));
  }
}

void Row::write_from(std::span<const std::byte> in) {
  const std::size_t n = std::min<std::size_t>(in.size(), size);
  for (std::size_t off = 0, w = 0; off < size; off += 8, ++w) {
    std::uint64_t v = 0;
    if (off < n) std::memcpy(&v, in.data() + off, std::min<std::size_t>(8, n - off));
    words[w].store(v, std::memory_order_relaxed);
  }
}

RowStore::RowStore(std::size_t expected_keys) {
  std::size_t n = std::bit_ceil(std::max<std::size_t>(2 * expected_keys, 16));
  mask_ = n - 1;
  buckets_ = std::make_unique<Bucket[]>(n);
}

RowStore::~RowStore() {
  for (std::size_t b = 0; b <= mask_; ++b) {
    Row* r = buckets_[b].head.load(std::memory_order_relaxed);
    while (r) {
      Row* next = r->next;
      delete r;
      r = next;
    }
  }
}

std::size_t RowStore::index_of(const RecordKey& key) const {
  std::uint64_t h = fnv1a(key);
  return (h ^ (h >> 29)) & mask_;
}

Row* RowStore::find(const RecordKey& key) const {
  for (Row* r = buckets_[index_of(key)].head.load(std::memory_order_acquire); r;
       r = r->next)
    if (r->key == key) return r;
  return nullptr;
}

Row* RowStore::get_or_create(const RecordKey& key, std::uint32_t record_size) {
  if (Row* r = find(key)) return r;
  std::size_t b = index_of(key);
  std::lock_guard<SpinLatch> guard(buckets_[b].latch);
  if (Row* r = find(key)) return r;
  auto* row = new Row(key, record_size, b);
  row->next = buckets_[b].head.load(std::memory_order_relaxed);
  buckets_[b].head.store(row, std::memory_order_release);
  return row;
}

}  // namespace bohm
