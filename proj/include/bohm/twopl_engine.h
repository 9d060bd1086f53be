#pragma once

#include "bohm/baseline.h"

namespace bohm {

// Deadlock-free two-phase locking: shared locks for read-only keys,
// exclusive for written keys, acquired in lexicographic key order with FIFO
// waiter queues, released after the logic has updated the rows in place.
class TwoPlEngine final : public SingleVersionEngine {
 public:
  explicit TwoPlEngine(BaselineConfig config) : SingleVersionEngine(config) {}
  ~TwoPlEngine() override;

  std::string name() const override { return "2pl"; }

  // Lock requests currently queued on any row, granted or waiting.
  std::size_t lock_census() const;

 protected:
  std::uint64_t run(Transaction& txn, std::size_t worker,
                    Scratch& scratch) override;
  void on_start() override;

 private:
  struct LockPlan {
    std::vector<LockRequest> requests;
    std::vector<Row*> read_rows;
    std::vector<Row*> write_rows;
  };

  void acquire(LockRequest& req);
  void release(LockRequest& req);

  std::vector<LockPlan> plans_;
};

}  // namespace bohm
