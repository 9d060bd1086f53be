#pragma once

#include <atomic>
#include <deque>
#include <memory>
#include <stdexcept>
#include <thread>

#include "bohm/core.h"

namespace bohm {

class RejectedAfterShutdown : public std::runtime_error {
 public:
  RejectedAfterShutdown() : std::runtime_error("engine is draining") {}
};

class EmptyLog : public std::runtime_error {
 public:
  EmptyLog() : std::runtime_error("no pending transactions to seal") {}
};

// Builds the transaction log. Timestamps are implicit log positions and are
// assigned only when a batch is sealed. Single-threaded: every call must come
// from the same thread (mutations from any other thread are counted).
class Sequencer {
 public:
  explicit Sequencer(Timestamp first_ts = 0, BatchId first_batch = 0)
      : next_ts_(first_ts), next_batch_id_(first_batch) {}

  void enqueue(std::unique_ptr<Transaction> txn);

  // Seals the first min(batch_size, pending) transactions into a batch with
  // dense timestamps. With nothing pending, returns an empty batch while
  // draining and throws EmptyLog otherwise.
  std::unique_ptr<Batch> seal_batch(std::size_t batch_size);

  void begin_drain() { draining_ = true; }
  bool draining() const { return draining_; }

  std::size_t pending() const { return pending_.size(); }
  Timestamp next_ts() const { return next_ts_; }
  BatchId next_batch_id() const { return next_batch_id_; }

  // Mutations issued from a thread other than the first one to mutate.
  std::uint64_t cross_thread_mutations() const { return cross_thread_; }

 private:
  void note_mutation();

  Timestamp next_ts_;
  BatchId next_batch_id_;
  std::deque<std::unique_ptr<Transaction>> pending_;
  bool draining_ = false;
  std::thread::id owner_{};
  std::uint64_t cross_thread_ = 0;
};

}  // namespace bohm
