#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bohm/engine.h"
#include "bohm/serial_replay.h"
#include "bohm/workloads.h"

namespace bohm {

struct RunConfig {
  std::string engine = "bohm";
  std::size_t cc_threads = 1;
  std::size_t exec_threads = 1;
  // Baselines only. Falls back to exec_threads when unset.
  std::optional<std::size_t> worker_threads;
  std::size_t batch_size = 10000;
  std::size_t queue_depth = 4;
  WorkloadSpec workload;

  double duration_seconds = 30;
  double warmup_seconds = 5;
  // Submit exactly this many transactions instead of running for a time.
  std::optional<std::uint64_t> txn_count;

  bool gc = true;
  bool annotate_reads = true;
  bool poison_reclaimed = false;
  bool pin_threads = true;
  // Retain the log, replay it serially and diff reads and final state.
  bool verify = false;
  std::string out_path;
};

struct RunMetrics {
  std::string engine;
  std::string workload;
  std::size_t cc_threads = 0;
  std::size_t exec_threads = 0;
  double theta = 0;

  double elapsed_seconds = 0;
  std::uint64_t committed = 0;
  std::uint64_t ops = 0;
  double txns_per_sec = 0;
  double ops_per_sec = 0;
  // Committed transactions in each whole second of the measured window.
  std::vector<std::uint64_t> per_second;
  std::vector<std::uint64_t> per_second_ops;

  std::uint64_t retries = 0;
  std::uint64_t logical_aborts = 0;
  std::uint64_t deferred = 0;
  std::uint64_t gc_reclaimed = 0;
  std::uint64_t watermark_lag = 0;
  // 2PL: lock requests still queued after drain.
  std::optional<std::size_t> lock_census;

  std::optional<VerifyReport> verify;
  std::optional<std::uint64_t> final_digest;
  std::vector<std::string> warnings;

  bool failed = false;
  std::string error;
};

// Throws ConfigError for unknown or unsupported engines and for thread
// settings that do not apply to the chosen engine.
std::unique_ptr<Engine> make_engine(const RunConfig& config, bool retain_log);

RunMetrics run(const RunConfig& config);

// Runs each config in turn. A run that throws yields a failed row and the
// sweep continues. Throws ConfigError on an empty list.
std::vector<RunMetrics> sweep(const std::vector<RunConfig>& configs);

inline constexpr const char* kCsvHeader =
    "engine,cc_threads,exec_threads,workload,theta,txns_per_sec,ops_per_sec,"
    "retries,deferred,gc_reclaimed";

// One row per measured second, then the summary row.
void write_run_csv(std::ostream& os, const RunMetrics& m, bool header = true);
void write_summary_row(std::ostream& os, const RunMetrics& m);

}  // namespace bohm
