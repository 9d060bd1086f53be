#include "bohm/exec_layer.h"

#include <algorithm>
#include <limits>

#include "bohm/sync.h"

namespace bohm {

namespace {

inline void check_poisoned(const Version& v, bool enabled) {
  if (enabled && v.poisoned())
    instrument::counters().poisoned_accesses.fetch_add(
        1, std::memory_order_relaxed);
}

}  // namespace

Version* resolve_read(const Transaction& txn, std::size_t read_index,
                      const Storage& storage, bool annotated,
                      bool check_poison) {
  instrument::ReadScope scope;
  if (annotated) {
    Version* v = txn.read_refs[read_index];
    if (v) check_poisoned(*v, check_poison);
    return v;
  }
  Version* v = storage.index_get(txn.read_set[read_index]);
  while (v) {
    check_poisoned(*v, check_poison);
    if (v->begin_ts() < txn.ts) return v;
    v = v->prev();
  }
  return nullptr;
}

WatermarkState::WatermarkState(std::size_t exec_threads)
    : n_(exec_threads), slots_(std::make_unique<Slot[]>(exec_threads)) {}

void WatermarkState::finish(std::size_t thread, BatchId batch) {
  slots_[thread].done.store(batch, std::memory_order_release);
}

BatchId WatermarkState::done(std::size_t thread) const {
  return slots_[thread].done.load(std::memory_order_acquire);
}

BatchId WatermarkState::min_done() const {
  BatchId m = std::numeric_limits<BatchId>::max();
  for (std::size_t i = 0; i < n_; ++i) m = std::min(m, done(i));
  return m;
}

BatchId WatermarkState::tick() {
  BatchId m = min_done();
  low_.store(m, std::memory_order_release);
  return m;
}

Executor::Executor(const Storage& storage, ExecConfig config)
    : storage_(storage),
      config_(config),
      scratch_(static_cast<std::size_t>(std::max(config.max_recursion, 0)) + 1) {}

void Executor::touch(const Version& v) const {
  check_poisoned(v, config_.check_poison);
}

ExecResult Executor::defer(Transaction& txn) {
  ExecCounters::bump(counters_.deferred);
  txn.state.store(TxnState::kUnprocessed, std::memory_order_release);
  return ExecResult::kDeferred;
}

AwaitResult Executor::await_payload(const Version& v, int depth) {
  Backoff backoff;
  for (;;) {
    touch(v);
    if (v.published()) return AwaitResult::kReady;
    Transaction* producer = v.producer();
    if (!producer) continue;  // cleared right after publication
    switch (producer->state.load(std::memory_order_acquire)) {
      case TxnState::kExecuting:
        return AwaitResult::kDeferred;
      case TxnState::kComplete:
        backoff.pause();
        continue;
      case TxnState::kUnprocessed:
        break;
    }
    // At the recursion cap an unclaimed producer is left to its own thread;
    // waiting on it here could wait on ourselves.
    if (depth >= config_.max_recursion) return AwaitResult::kDeferred;
    if (try_acquire(*producer)) {
      ExecCounters::bump(counters_.recursive);
      if (execute(*producer, depth + 1) == ExecResult::kDeferred)
        return AwaitResult::kDeferred;
    }
  }
}

AwaitResult Executor::abort_copy_forward(const Transaction& txn,
                                         std::span<WriteValue> writes,
                                         int depth) {
  for (std::size_t j = 0; j < writes.size(); ++j) {
    const Version* prev = txn.write_refs[j]->prev();
    if (!prev) {
      writes[j].tombstone = true;
      continue;
    }
    if (await_payload(*prev, depth) == AwaitResult::kDeferred)
      return AwaitResult::kDeferred;
    if (prev->tombstone()) {
      writes[j].tombstone = true;
    } else {
      auto src = prev->payload();
      std::copy_n(src.begin(), std::min(src.size(), writes[j].bytes.size()),
                  writes[j].bytes.begin());
      writes[j].tombstone = false;
    }
  }
  return AwaitResult::kReady;
}

ExecResult Executor::execute(Transaction& txn, int depth) {
  Scratch& s = scratch_[static_cast<std::size_t>(depth)];
  const std::size_t nr = txn.read_set.size();
  const std::size_t nw = txn.write_set.size();

  s.reads.assign(nr, ReadValue{});
  for (std::size_t i = 0; i < nr; ++i) {
    const Version* v =
        resolve_read(txn, i, storage_, config_.annotated_reads,
                     config_.check_poison);
    if (!v) continue;
    if (await_payload(*v, depth) == AwaitResult::kDeferred) return defer(txn);
    if (!v->tombstone()) s.reads[i] = ReadValue{v->payload(), true};
  }

  std::size_t total = 0;
  for (const auto& k : txn.write_set) total += storage_.record_size(k.table);
  s.buffer.assign(total, std::byte{0});
  s.writes.resize(nw);
  std::size_t off = 0;
  for (std::size_t j = 0; j < nw; ++j) {
    std::size_t sz = storage_.record_size(txn.write_set[j].table);
    s.writes[j] = WriteValue{std::span<std::byte>(s.buffer.data() + off, sz),
                             false};
    off += sz;
  }

  const bool aborted = txn.logic(s.reads, s.writes) == Outcome::kAbort;
  if (aborted && abort_copy_forward(txn, s.writes, depth) ==
                     AwaitResult::kDeferred)
    return defer(txn);

  for (std::size_t j = 0; j < nw; ++j)
    txn.write_refs[j]->publish(s.writes[j].bytes, s.writes[j].tombstone);

  if (config_.record_reads) {
    txn.observed.clear();
    for (const auto& r : s.reads) append_observed(txn.observed, r);
  }
  txn.aborted = aborted;
  txn.state.store(TxnState::kComplete, std::memory_order_release);

  ExecCounters::bump(counters_.committed);
  ExecCounters::bump(counters_.ops, txn.op_count());
  if (aborted) ExecCounters::bump(counters_.logical_aborts);
  return ExecResult::kExecuted;
}

void Executor::process_batch(Batch& batch, std::size_t thread, std::size_t k) {
  pending_.clear();
  for (std::size_t i = thread; i < batch.txns.size(); i += k)
    pending_.push_back(batch.txns[i].get());

  Backoff backoff;
  while (!pending_.empty()) {
    bool progress = false;
    std::size_t keep = 0;
    for (Transaction* t : pending_) {
      auto st = t->state.load(std::memory_order_acquire);
      if (st == TxnState::kComplete) {
        progress = true;
        continue;
      }
      if (st == TxnState::kUnprocessed && try_acquire(*t) &&
          execute(*t) == ExecResult::kExecuted) {
        progress = true;
        continue;
      }
      pending_[keep++] = t;
    }
    pending_.resize(keep);
    if (progress)
      backoff.reset();
    else
      backoff.pause();
  }
}

}  // namespace bohm
