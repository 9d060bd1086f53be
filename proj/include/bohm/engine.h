#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bohm/core.h"
#include "bohm/storage.h"

namespace bohm {

struct EngineStats {
  std::uint64_t committed = 0;
  std::uint64_t ops = 0;
  std::uint64_t logical_aborts = 0;
  std::uint64_t retries = 0;
  std::uint64_t deferred = 0;
  std::uint64_t gc_reclaimed = 0;
  std::uint64_t watermark_lag = 0;
};

// Common surface of the multi-version engine and the single-version
// baselines. Lifecycle: create_table/bulk_load, start, submit..., drain.
// After drain the engine is quiescent and snapshot()/serial_order() are
// valid.
class Engine {
 public:
  virtual ~Engine() = default;

  virtual std::string name() const = 0;
  virtual void create_table(TableId id, std::uint32_t record_size,
                            std::size_t expected_keys) = 0;
  virtual void bulk_load(TableId id, std::span<const Record> records) = 0;
  virtual std::uint32_t record_size(TableId id) const = 0;

  virtual void start() = 0;
  // Called from a single client thread.
  virtual void submit(std::unique_ptr<Transaction> txn) = 0;
  virtual void drain() = 0;

  // Safe to call while running; counters are approximate until drain.
  virtual EngineStats stats() const = 0;
  virtual DbState snapshot() const = 0;

  // Committed transactions in the engine's serialization order. Requires the
  // engine to have been configured to retain its log.
  virtual std::vector<const Transaction*> serial_order() const = 0;
};

}  // namespace bohm
