#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bohm/engine.h"
#include "bohm/row_store.h"

namespace bohm {

struct BaselineConfig {
  std::size_t workers = 1;
  // Keep committed transactions, their recorded reads and their
  // serialization positions for verification.
  bool retain_log = false;
  bool pin_threads = true;
  std::size_t queue_capacity = 4096;
};

// Bounded multi-producer/multi-consumer hand-off from the client thread to
// the worker threads.
class TxnQueue {
 public:
  explicit TxnQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::unique_ptr<Transaction> txn);
  // Null once closed and empty.
  std::unique_ptr<Transaction> pop();
  void close();

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<std::unique_ptr<Transaction>> items_;
  bool closed_ = false;
};

// Shared machinery of the update-in-place engines: catalog, row store,
// worker pool, counters and the verification log. Subclasses supply the
// concurrency-control protocol in run().
class SingleVersionEngine : public Engine {
 public:
  explicit SingleVersionEngine(BaselineConfig config);
  ~SingleVersionEngine() override;

  void create_table(TableId id, std::uint32_t record_size,
                    std::size_t expected_keys) override;
  void bulk_load(TableId id, std::span<const Record> records) override;
  std::uint32_t record_size(TableId id) const override;

  void start() override;
  void submit(std::unique_ptr<Transaction> txn) override;
  void drain() override;

  EngineStats stats() const override;
  DbState snapshot() const override;
  std::vector<const Transaction*> serial_order() const override;

  const BaselineConfig& config() const { return config_; }

 protected:
  struct alignas(64) WorkerCounters {
    std::atomic<std::uint64_t> committed{0};
    std::atomic<std::uint64_t> ops{0};
    std::atomic<std::uint64_t> logical_aborts{0};
    std::atomic<std::uint64_t> retries{0};
  };

  // Scratch reused across a worker's transactions.
  struct Scratch {
    std::vector<std::byte> read_buf;
    std::vector<ReadValue> reads;
    std::vector<std::byte> write_buf;
    std::vector<WriteValue> writes;
  };

  // Executes txn to commit. Returns the serialization position when the log
  // is retained (0 otherwise).
  virtual std::uint64_t run(Transaction& txn, std::size_t worker,
                            Scratch& scratch) = 0;
  virtual void on_start() {}
  virtual void on_stop() {}

  // Derived destructors call this so no worker is inside run() while the
  // derived part is torn down.
  void shutdown();

  // Sizes the scratch buffers for txn. Called before any lock is taken.
  void prepare(const Transaction& txn, Scratch& s) const;
  void record_reads(Transaction& txn, const Scratch& s) const;
  std::uint64_t next_serial() {
    return serial_.fetch_add(1, std::memory_order_relaxed) + 1;
  }
  static void bump(std::atomic<std::uint64_t>& c, std::uint64_t by = 1) {
    c.store(c.load(std::memory_order_relaxed) + by, std::memory_order_relaxed);
  }

  RowStore& store();
  const RowStore* store_if_loaded() const { return store_.get(); }
  WorkerCounters& counters(std::size_t worker) { return counters_[worker]; }

  BaselineConfig config_;

 private:
  void worker_loop(std::size_t worker);

  std::unordered_map<TableId, std::uint32_t> record_sizes_;
  std::size_t expected_keys_ = 0;
  std::unique_ptr<RowStore> store_;
  TxnQueue queue_;
  std::unique_ptr<WorkerCounters[]> counters_;
  std::atomic<std::uint64_t> serial_{0};

  mutable std::mutex log_mu_;
  std::vector<std::pair<std::uint64_t, std::unique_ptr<Transaction>>> log_;

  std::vector<std::thread> threads_;
  bool started_ = false;
  bool drained_ = false;
};

}  // namespace bohm
