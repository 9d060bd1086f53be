// Test-side reference machinery. Kept independent of the library's own
// replay code so the oracle does not share bugs with what it checks.
#pragma once

#include <cstring>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bohm/core.h"
#include "bohm/engine.h"

namespace bohm::testing {

using Value = std::optional<Payload>;

// Inverse of append_observed.
inline std::vector<Value> decode_observed(const Payload& bytes) {
  std::vector<Value> out;
  std::size_t i = 0;
  while (i < bytes.size()) {
    bool found = bytes[i++] == std::byte{1};
    if (!found) {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::uint32_t len = 0;
    std::memcpy(&len, bytes.data() + i, 4);
    i += 4;
    out.emplace_back(Payload(bytes.begin() + i, bytes.begin() + i + len));
    i += len;
  }
  return out;
}

// Straight-line serial executor over a std::map.
struct RefDb {
  std::map<RecordKey, Payload> rows;
  std::map<TableId, std::uint32_t> sizes;

  std::vector<Value> run(const Transaction& t) {
    std::vector<Payload> rbuf(t.read_set.size());
    std::vector<ReadValue> reads(t.read_set.size());
    std::vector<Value> seen;
    for (std::size_t i = 0; i < t.read_set.size(); ++i) {
      auto it = rows.find(t.read_set[i]);
      if (it == rows.end()) {
        seen.emplace_back(std::nullopt);
        continue;
      }
      rbuf[i] = it->second;
      reads[i] = ReadValue{rbuf[i], true};
      seen.emplace_back(rbuf[i]);
    }
    std::vector<Payload> wbuf;
    for (const auto& k : t.write_set) wbuf.emplace_back(sizes.at(k.table), std::byte{0});
    std::vector<WriteValue> writes;
    for (auto& b : wbuf) writes.push_back(WriteValue{b, false});
    if (t.logic(reads, writes) == Outcome::kCommit)
      for (std::size_t j = 0; j < t.write_set.size(); ++j) {
        if (writes[j].tombstone)
          rows.erase(t.write_set[j]);
        else
          rows[t.write_set[j]] = wbuf[j];
      }
    return seen;
  }
};

struct OracleResult {
  std::size_t txns = 0;
  std::size_t read_mismatches = 0;
  bool state_equal = false;
  std::string detail;
  bool ok() const { return read_mismatches == 0 && state_equal; }
};

// Replays the engine's serialization order from `initial` and compares the
// decoded reads of every transaction plus the final state.
inline OracleResult check_against_reference(const Engine& e, const DbState& initial,
                                            const std::map<TableId, std::uint32_t>& sizes) {
  OracleResult r;
  RefDb ref{initial, sizes};
  auto order = e.serial_order();
  r.txns = order.size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto expect = ref.run(*order[i]);
    if (decode_observed(order[i]->observed) != expect && r.read_mismatches++ == 0)
      r.detail = "reads differ at position " + std::to_string(i) + " ts " +
                 std::to_string(order[i]->ts);
  }
  r.state_equal = e.snapshot() == ref.rows;
  if (!r.state_equal && r.detail.empty()) r.detail = "final state differs";
  return r;
}

inline Payload i64_payload(std::int64_t v, std::size_t size = 8) {
  Payload p(size, std::byte{0});
  std::memcpy(p.data(), &v, 8);
  return p;
}

inline std::int64_t i64_of(const Payload& p) {
  std::int64_t v;
  std::memcpy(&v, p.data(), 8);
  return v;
}

// Random transactions over a small key space: mixed reads, blind writes,
// RMWs, tombstones and logical aborts. Logic is a pure function of the
// reads and of constants fixed at generation.
struct RandomTxnGen {
  std::mt19937_64 rng;
  std::uint64_t keys;
  std::uint32_t tables = 2;

  RandomTxnGen(std::uint64_t seed, std::uint64_t key_space) : rng(seed), keys(key_space) {}

  std::vector<RecordKey> pick(std::size_t n) {
    std::vector<RecordKey> out;
    while (out.size() < n) {
      RecordKey k{static_cast<TableId>(rng() % tables), rng() % keys};
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
  }

  std::unique_ptr<Transaction> next() {
    auto rs = pick(rng() % 5);
    std::vector<RecordKey> ws;
    for (const auto& k : rs)
      if (rng() % 2) ws.push_back(k);
    for (const auto& k : pick(rng() % 3))
      if (std::find(ws.begin(), ws.end(), k) == ws.end()) ws.push_back(k);
    const std::uint64_t salt = rng();
    const bool may_abort = rng() % 8 == 0;
    const bool may_delete = rng() % 10 == 0;
    return std::make_unique<Transaction>(
        rs, ws, [salt, may_abort, may_delete](std::span<const ReadValue> r,
                                              std::span<WriteValue> w) {
          std::uint64_t h = salt;
          for (const auto& v : r) {
            h = h * 1099511628211ull + (v.found ? 1 : 2);
            if (v.found) h ^= static_cast<std::uint64_t>(load_i64(v.bytes));
          }
          if (may_abort && (h & 1)) return Outcome::kAbort;
          for (std::size_t j = 0; j < w.size(); ++j) {
            if (may_delete && j == 0 && (h & 2)) {
              w[j].tombstone = true;
              continue;
            }
            store_i64(w[j].bytes, static_cast<std::int64_t>(h + j));
          }
          return Outcome::kCommit;
        });
  }
};

}  // namespace bohm::testing
