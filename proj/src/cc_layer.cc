#include "bohm/cc_layer.h"

#include <cassert>

namespace bohm {

CcPartition::CcPartition(std::uint32_t id, Storage& storage,
                         bool annotate_reads)
    : id_(id),
      partitions_(storage.partitions()),
      storage_(storage),
      pool_(storage.pool(id)),
      annotate_reads_(annotate_reads) {}

IndexEntry* CcPartition::lookup(const RecordKey& key) {
  auto it = latest_.find(key);
  if (it != latest_.end()) return it->second;
  // First touch of a loaded key; later lookups stay thread-local.
  IndexEntry* e = storage_.index(key.table).find(key);
  if (e) latest_.emplace(key, e);
  return e;
}

Version* CcPartition::install_placeholder(const RecordKey& key,
                                          Transaction& txn,
                                          std::size_t write_index,
                                          BatchId batch) {
  IndexEntry* entry = lookup(key);
  Version* old = entry ? entry->head.load(std::memory_order_relaxed) : nullptr;
  assert(!old || old->begin_ts() < txn.ts);

  Version* v = pool_.create(key, txn.ts, &txn, old,
                            storage_.record_size(key.table));
  if (old) {
    old->set_end_ts(txn.ts);
    instrument::note_shared_write();
    defer_.push_back({old, v, batch});
  }
  if (entry) {
    TableIndex::install(*entry, v);
  } else {
    latest_.emplace(key, storage_.index(key.table).install(key, v, id_));
  }
  txn.write_refs[write_index] = v;
  ++stats_.installed;
  return v;
}

void CcPartition::annotate_read(const RecordKey& key, Transaction& txn,
                                std::size_t read_index) {
  instrument::AnnotateScope scope;
  IndexEntry* entry = lookup(key);
  Version* head = entry ? entry->head.load(std::memory_order_relaxed) : nullptr;
  assert(!head || head->begin_ts() < txn.ts);
  txn.read_refs[read_index] = head;
  ++stats_.annotated;
}

void CcPartition::process_batch(Batch& batch) {
  for (auto& txn_ptr : batch.txns) {
    Transaction& txn = *txn_ptr;
    if (annotate_reads_) {
      for (std::size_t i = 0; i < txn.read_set.size(); ++i)
        if (owns(txn.read_set[i])) annotate_read(txn.read_set[i], txn, i);
    }
    for (std::size_t i = 0; i < txn.write_set.size(); ++i)
      if (owns(txn.write_set[i]))
        install_placeholder(txn.write_set[i], txn, i, batch.id);
  }
}

std::size_t CcPartition::gc_reclaim(BatchId low_watermark, bool poison) {
  std::size_t n = 0;
  while (!defer_.empty() && defer_.front().superseded_in <= low_watermark) {
    DeferredVersion d = defer_.front();
    defer_.pop_front();
    d.successor->set_prev(nullptr);
    if (on_reclaim_) on_reclaim_(*d.old);
    if (poison) {
      d.old->poison();
      graveyard_.push_back(d.old);
    } else {
      pool_.recycle(d.old);
    }
    ++n;
  }
  stats_.reclaimed += n;
  return n;
}

}  // namespace bohm
