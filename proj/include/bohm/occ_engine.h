#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "bohm/baseline.h"

namespace bohm {

struct OccConfig {
  std::chrono::milliseconds epoch_period{40};
};

// Silo-style optimistic concurrency control. Reads record (row, tid) pairs,
// writes are buffered; commit locks the write set in key order, re-checks
// every read tid and installs with a tid built from the global epoch and the
// worker's own history. Failed validation backs off and retries.
class OccEngine final : public SingleVersionEngine {
 public:
  explicit OccEngine(BaselineConfig config, OccConfig occ = {});
  ~OccEngine() override;

  std::string name() const override { return "occ"; }

  std::uint64_t epoch() const { return epoch_.load(std::memory_order_acquire); }

 protected:
  std::uint64_t run(Transaction& txn, std::size_t worker,
                    Scratch& scratch) override;
  void on_start() override;
  void on_stop() override;

 private:
  static constexpr std::uint64_t kLockBit = 1ull << 63;

  struct alignas(64) WorkerState {
    std::uint64_t last_tid = 0;
    std::vector<Row*> read_rows;
    std::vector<std::uint64_t> read_tids;
    std::vector<std::pair<RecordKey, std::size_t>> write_order;
    std::vector<Row*> write_rows;
  };

  enum class Attempt { kCommitted, kConflict };
  Attempt attempt(Transaction& txn, WorkerState& w, Scratch& s,
                  std::uint64_t& seq);
  void epoch_loop();

  OccConfig occ_;
  std::atomic<std::uint64_t> epoch_{1};
  std::vector<WorkerState> workers_;

  std::mutex epoch_mu_;
  std::condition_variable epoch_cv_;
  bool epoch_stop_ = false;
  std::thread epoch_thread_;
};

}  // namespace bohm
