#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "bohm/core.h"
#include "bohm/engine.h"
#include "bohm/zipf.h"

namespace bohm {

enum class WorkloadKind {
  kMicro10RMW,
  kYcsb10RMW,
  kYcsb2RMW8R,
  kReadOnlyMix,
  kSmallBank,
};

std::string_view to_string(WorkloadKind k);
// Accepts the names produced by to_string; throws ConfigError otherwise.
WorkloadKind parse_workload_kind(std::string_view name);

enum class SmallBankTxn : std::size_t {
  kBalance,
  kDeposit,
  kTransactSaving,
  kAmalgamate,
  kWriteCheck,
};

inline constexpr TableId kYcsbTable = 0;
inline constexpr TableId kCustomerTable = 1;
inline constexpr TableId kSavingsTable = 2;
inline constexpr TableId kCheckingTable = 3;

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kMicro10RMW;
  double theta = 0.0;
  std::uint64_t db_size = 100'000;
  // YCSB kinds only; the microbenchmark holds one 64-bit integer per record.
  std::uint32_t record_size = 1000;
  double readonly_fraction = 0.01;
  std::uint64_t scan_size = 10'000;

  std::uint64_t customers = 50;
  std::uint32_t spin_us = 50;
  // Relative weights, indexed by SmallBankTxn.
  std::array<double, 5> mix{1, 1, 1, 1, 1};
  // Insufficient funds: logical abort instead of the overdraft penalty.
  bool writecheck_abort = false;
  std::int64_t initial_balance = 10'000;

  std::uint64_t seed = 1;

  // Throws ConfigError on impossible parameters.
  void validate() const;
};

// Bytes per record of table `t` under spec.
std::uint32_t table_record_size(const WorkloadSpec& spec, TableId t);

// Creates and bulk-loads the workload's tables. Returns the loaded contents
// so callers can replay against them.
DbState load_workload(Engine& engine, const WorkloadSpec& spec);

// Deterministic stream of transactions for one spec and seed.
class TxnGenerator {
 public:
  explicit TxnGenerator(const WorkloadSpec& spec);

  std::unique_ptr<Transaction> next();

  // Kind of the last SmallBank transaction produced.
  SmallBankTxn last_smallbank() const { return last_sb_; }
  bool last_read_only() const { return last_ro_; }

 private:
  std::unique_ptr<Transaction> ycsb_rmw(std::size_t rmw, std::size_t reads);
  std::unique_ptr<Transaction> read_only_scan();
  std::unique_ptr<Transaction> smallbank();
  std::vector<std::uint64_t> distinct_zipf(std::size_t k);
  std::vector<std::uint64_t> distinct_uniform(std::uint64_t n, std::size_t k);

  WorkloadSpec spec_;
  std::mt19937_64 rng_;
  std::optional<ZipfGen> zipf_;
  std::array<double, 5> mix_cdf_{};
  SmallBankTxn last_sb_ = SmallBankTxn::kBalance;
  bool last_ro_ = false;
};

// Busy-waits for `us` microseconds.
void spin_for_us(std::uint32_t us);

}  // namespace bohm
