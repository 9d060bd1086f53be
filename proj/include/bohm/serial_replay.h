#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bohm/core.h"
#include "bohm/engine.h"

namespace bohm {

// Single-threaded reference execution. Runs each transaction's logic
// against a std::map state in the given order, applying writes only on
// commit, and records what every transaction read.
class SerialReplay {
 public:
  SerialReplay(DbState initial, std::function<std::uint32_t(TableId)> record_size)
      : state_(std::move(initial)), record_size_(std::move(record_size)) {}

  // Returns the observed-read encoding for txn.
  Payload apply(const Transaction& txn);

  const DbState& state() const { return state_; }

 private:
  DbState state_;
  std::function<std::uint32_t(TableId)> record_size_;
  std::vector<std::byte> buf_;
};

struct VerifyReport {
  std::size_t txns = 0;
  std::size_t read_mismatches = 0;
  std::size_t state_diffs = 0;
  std::uint64_t engine_digest = 0;
  std::uint64_t replay_digest = 0;
  std::string first_problem;

  bool ok() const { return read_mismatches == 0 && state_diffs == 0; }
};

// Replays `engine`'s committed log in its serialization order from
// `initial`, then compares every recorded read and the final state. The
// engine must be drained and configured to retain its log.
VerifyReport verify_against_replay(const Engine& engine, const DbState& initial);

// Number of keys whose presence or bytes differ.
std::size_t count_state_diffs(const DbState& a, const DbState& b,
                              std::string* first = nullptr);

}  // namespace bohm
