#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bohm/core.h"
#include "bohm/storage.h"

namespace bohm {

// Unprocessed -> Executing, atomically; exactly one caller wins.
inline bool try_acquire(Transaction& txn) {
  auto expected = TxnState::kUnprocessed;
  return txn.state.compare_exchange_strong(expected, TxnState::kExecuting,
                                           std::memory_order_acq_rel,
                                           std::memory_order_acquire);
}

// Version that txn reads for read_set[read_index], or null when nothing is
// visible. With annotated reads the cc-layer reference is returned as is;
// otherwise the chain is walked from the index head to the first version
// with begin_ts < txn.ts. At a shared boundary that is the predecessor: a
// transaction reads the state just before its own writes. Writes nothing.
// Tombstones are reported by the caller once the payload is available.
Version* resolve_read(const Transaction& txn, std::size_t read_index,
                      const Storage& storage, bool annotated,
                      bool check_poison = false);

enum class ExecResult { kExecuted, kDeferred };
enum class AwaitResult { kReady, kDeferred };

struct ExecConfig {
  bool annotated_reads = true;
  int max_recursion = 8;
  bool record_reads = false;
  bool check_poison = false;
};

// Single-writer counters readable from other threads.
struct ExecCounters {
  std::atomic<std::uint64_t> committed{0};
  std::atomic<std::uint64_t> logical_aborts{0};
  std::atomic<std::uint64_t> deferred{0};
  std::atomic<std::uint64_t> recursive{0};
  std::atomic<std::uint64_t> ops{0};

  static void bump(std::atomic<std::uint64_t>& c, std::uint64_t by = 1) {
    c.store(c.load(std::memory_order_relaxed) + by, std::memory_order_relaxed);
  }
};

// Per-exec-thread "last batch fully executed" counters and the low
// watermark derived from them.
class WatermarkState {
 public:
  explicit WatermarkState(std::size_t exec_threads);

  // Only exec thread `thread` calls this, with non-decreasing ids.
  void finish(std::size_t thread, BatchId batch);
  BatchId done(std::size_t thread) const;
  BatchId min_done() const;

  // Designated thread t0 only: low_watermark = min_i(done(i)).
  BatchId tick();
  BatchId low_watermark() const {
    return low_.load(std::memory_order_acquire);
  }
  std::size_t threads() const { return n_; }

 private:
  struct alignas(64) Slot {
    std::atomic<BatchId> done{0};
  };
  std::size_t n_;
  std::unique_ptr<Slot[]> slots_;
  std::atomic<BatchId> low_{0};
};

// Execution context of one exec thread.
class Executor {
 public:
  Executor(const Storage& storage, ExecConfig config);

  // Requires txn to be held in Executing by the caller. Resolves reads,
  // runs the logic into private buffers, then publishes every placeholder
  // and marks the transaction Complete. If a dependency is being executed
  // elsewhere, discards the buffers, resets txn to Unprocessed and returns
  // kDeferred; nothing is published in that case.
  ExecResult execute(Transaction& txn, int depth = 0);

  // Waits for a version's payload, executing its producer inline if nobody
  // has claimed it yet.
  AwaitResult await_payload(const Version& v, int depth);

  // Logical abort: each write buffer receives the predecessor version's
  // payload (tombstone when there is none).
  AwaitResult abort_copy_forward(const Transaction& txn,
                                 std::span<WriteValue> writes, int depth);

  // Drives T_i, T_{i+k}, ... of the batch to Complete, retrying deferred
  // ones round-robin. Other threads may complete some of them.
  void process_batch(Batch& batch, std::size_t thread, std::size_t k);

  const ExecCounters& counters() const { return counters_; }

 private:
  struct Scratch {
    std::vector<ReadValue> reads;
    std::vector<WriteValue> writes;
    std::vector<std::byte> buffer;
  };

  ExecResult defer(Transaction& txn);
  void touch(const Version& v) const;

  const Storage& storage_;
  ExecConfig config_;
  std::vector<Scratch> scratch_;
  std::vector<Transaction*> pending_;
  ExecCounters counters_;
};

}  // namespace bohm
