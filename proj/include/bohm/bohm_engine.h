#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "bohm/cc_layer.h"
#include "bohm/engine.h"
#include "bohm/exec_layer.h"
#include "bohm/sequencer.h"
#include "bohm/storage.h"
#include "bohm/sync.h"

namespace bohm {

struct BohmConfig {
  std::size_t cc_threads = 1;
  std::size_t exec_threads = 1;
  std::size_t batch_size = 10000;
  // Sealed batches the cc layer may lag behind the sequencer.
  std::size_t queue_depth = 4;
  bool annotate_reads = true;
  bool gc = true;
  int max_recursion = 8;
  // Keep every transaction (and its recorded reads) for verification.
  bool retain_log = false;
  // Mark reclaimed versions instead of recycling them, and count accesses.
  bool poison_reclaimed = false;
  bool pin_threads = true;
  // Test hook, runs on the owning cc thread before a version is released.
  std::function<void(const Version&)> on_reclaim;
};

// Multi-version engine: sequencer (caller's thread) -> m cc threads that
// install placeholders partition by partition -> n exec threads that fill
// them. The stages overlap on different batches.
class BohmEngine final : public Engine {
 public:
  explicit BohmEngine(BohmConfig config);
  ~BohmEngine() override;

  std::string name() const override { return "bohm"; }
  void create_table(TableId id, std::uint32_t record_size,
                    std::size_t expected_keys) override;
  void bulk_load(TableId id, std::span<const Record> records) override;
  std::uint32_t record_size(TableId id) const override {
    return storage_.record_size(id);
  }

  void start() override;
  void submit(std::unique_ptr<Transaction> txn) override;
  void drain() override;

  EngineStats stats() const override;
  DbState snapshot() const override;
  std::vector<const Transaction*> serial_order() const override;

  const BohmConfig& config() const { return config_; }
  const Storage& storage() const { return storage_; }
  const WatermarkState& watermark() const { return watermark_; }
  const Sequencer& sequencer() const { return sequencer_; }
  BatchId sealed_batches() const {
    return sealed_.load(std::memory_order_acquire);
  }

 private:
  struct OwnedBatch {
    std::unique_ptr<Batch> batch;
    BatchId retire_after = 0;  // 0 until the batch is fully executed
  };

  void dispatch(std::unique_ptr<Batch> batch);
  void cc_loop(std::size_t partition);
  void exec_loop(std::size_t thread);
  void retire_batches();
  Batch* slot(BatchId id) const { return ring_[id % ring_.size()]; }

  BohmConfig config_;
  Storage storage_;
  Sequencer sequencer_;
  std::vector<std::unique_ptr<CcPartition>> partitions_;
  std::vector<std::unique_ptr<Executor>> executors_;
  SenseBarrier barrier_;
  WatermarkState watermark_;

  std::vector<Batch*> ring_;
  mutable std::mutex owned_mu_;
  std::deque<OwnedBatch> owned_;

  std::atomic<BatchId> sealed_{0};
  std::atomic<BatchId> cc_done_{0};
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> gc_reclaimed_{0};
  Doorbell seal_bell_;
  Doorbell release_bell_;
  Doorbell progress_bell_;

  std::vector<std::thread> threads_;
  bool started_ = false;
  bool drained_ = false;
};

}  // namespace bohm
