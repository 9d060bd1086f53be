#include <chrono>
#include <thread>

#include "bohm/occ_engine.h"
#include "bohm/serial_replay.h"
#include "bohm/twopl_engine.h"
#include "bohm/workloads.h"
#include "doctest.h"
#include "support.h"

using namespace bohm;
using testing::i64_of;
using testing::i64_payload;

namespace {

BaselineConfig cfg(std::size_t workers, bool log = true) {
  BaselineConfig c;
  c.workers = workers;
  c.retain_log = log;
  c.pin_threads = false;
  return c;
}

std::unique_ptr<SingleVersionEngine> make(const std::string& kind, BaselineConfig c) {
  if (kind == "2pl") return std::make_unique<TwoPlEngine>(c);
  return std::make_unique<OccEngine>(c, OccConfig{std::chrono::milliseconds(5)});
}

DbState load_counters(Engine& e, std::uint64_t keys, std::uint32_t tables = 1) {
  DbState init;
  for (TableId t = 0; t < tables; ++t) {
    e.create_table(t, 8, keys);
    std::vector<Record> recs;
    for (std::uint64_t k = 0; k < keys; ++k) {
      recs.emplace_back(k, i64_payload(0));
      init[{t, k}] = i64_payload(0);
    }
    e.bulk_load(t, recs);
  }
  return init;
}

std::unique_ptr<Transaction> incr(std::vector<RecordKey> keys) {
  return std::make_unique<Transaction>(
      keys, keys, [](std::span<const ReadValue> r, std::span<WriteValue> w) {
        for (std::size_t i = 0; i < w.size(); ++i)
          store_i64(w[i].bytes, load_i64(r[i].bytes) + 1);
        return Outcome::kCommit;
      });
}

}  // namespace


TEST_CASE("baselines: disjoint single-key increments") {
  for (std::string kind : {"2pl", "occ"}) {
    CAPTURE(kind);
    auto e = make(kind, cfg(4));
    load_counters(*e, 64);
    e->start();
    for (int round = 0; round < 25; ++round)
      for (std::uint64_t k = 0; k < 64; ++k) e->submit(incr({{0, k}}));
    e->drain();
    auto s = e->snapshot();
    for (std::uint64_t k = 0; k < 64; ++k) CHECK(i64_of(s.at({0, k})) == 25);
    CHECK(e->stats().committed == 64 * 25);
  }
}

TEST_CASE("baselines: contended RMW sum is exact") {
  for (std::string kind : {"2pl", "occ"}) {
    CAPTURE(kind);
    auto e = make(kind, cfg(4));
    load_counters(*e, 5);
    e->start();
    std::mt19937_64 rng(3);
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      // Two distinct keys out of five, listed in random order.
      std::uint64_t a = rng() % 5, b = (a + 1 + rng() % 4) % 5;
      e->submit(incr({{0, a}, {0, b}}));
    }
    e->drain();
    std::int64_t sum = 0;
    for (const auto& [k, v] : e->snapshot()) sum += i64_of(v);
    CHECK(sum == 2 * n);
    if (kind == "2pl") CHECK(static_cast<TwoPlEngine&>(*e).lock_census() == 0);
  }
}

TEST_CASE("baselines: serialization order replays to the same reads and state") {
  for (std::string kind : {"2pl", "occ"}) {
    for (std::size_t workers : {1, 3, 8}) {
      CAPTURE(kind);
      CAPTURE(workers);
      auto e = make(kind, cfg(workers));
      auto init = load_counters(*e, 12, 2);
      e->start();
      testing::RandomTxnGen gen(workers * 31 + kind.size(), 16);
      for (int i = 0; i < 3000; ++i) e->submit(gen.next());
      e->drain();
      auto r = testing::check_against_reference(*e, init, {{0, 8}, {1, 8}});
      CHECK_MESSAGE(r.ok(), r.detail);
      CHECK(r.txns == 3000);
      // Library replay agrees with the test oracle.
      CHECK(verify_against_replay(*e, init).ok());
    }
  }
}

TEST_CASE("occ retries a transaction whose read was overwritten") {
  auto e = std::make_unique<OccEngine>(cfg(2), OccConfig{std::chrono::milliseconds(5)});
  auto init = load_counters(*e, 2);
  e->start();
  std::atomic<int> calls{0};
  std::atomic<bool> slow_started{false};
  // Slow reader of key 0: its first execution stalls long enough for the
  // blind writer below to commit.
  e->submit(std::make_unique<Transaction>(
      std::vector<RecordKey>{{0, 0}}, std::vector<RecordKey>{{0, 1}},
      [&](std::span<const ReadValue> r, std::span<WriteValue> w) {
        if (calls.fetch_add(1) == 0) {
          slow_started = true;
          std::this_thread::sleep_for(std::chrono::milliseconds(300));
        }
        store_i64(w[0].bytes, load_i64(r[0].bytes));
        return Outcome::kCommit;
      }));
  while (!slow_started) std::this_thread::yield();
  e->submit(std::make_unique<Transaction>(
      std::vector<RecordKey>{}, std::vector<RecordKey>{{0, 0}},
      [](std::span<const ReadValue>, std::span<WriteValue> w) {
        store_i64(w[0].bytes, 77);
        return Outcome::kCommit;
      }));
  e->drain();
  CHECK(calls.load() >= 2);
  CHECK(e->stats().retries >= 1);
  auto s = e->snapshot();
  CHECK(i64_of(s.at({0, 1})) == 77);
  CHECK(verify_against_replay(*e, init).ok());
}

TEST_CASE("2pl waiter observes the holder's write") {
  TwoPlEngine e(cfg(2));
  load_counters(e, 1);
  e.start();
  std::atomic<bool> holder_in{false};
  e.submit(std::make_unique<Transaction>(
      std::vector<RecordKey>{{0, 0}}, std::vector<RecordKey>{{0, 0}},
      [&](std::span<const ReadValue> r, std::span<WriteValue> w) {
        holder_in = true;
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
        store_i64(w[0].bytes, load_i64(r[0].bytes) + 10);
        return Outcome::kCommit;
      }));
  while (!holder_in) std::this_thread::yield();
  std::atomic<std::int64_t> seen{-1};
  e.submit(std::make_unique<Transaction>(
      std::vector<RecordKey>{{0, 0}}, std::vector<RecordKey>{},
      [&](std::span<const ReadValue> r, std::span<WriteValue>) {
        seen = load_i64(r[0].bytes);
        return Outcome::kCommit;
      }));
  e.drain();
  CHECK(seen.load() == 10);
  CHECK(e.lock_census() == 0);
}

TEST_CASE("baselines: logical aborts leave no trace") {
  for (std::string kind : {"2pl", "occ"}) {
    CAPTURE(kind);
    auto e = make(kind, cfg(2));
    load_counters(*e, 1);
    e->start();
    e->submit(std::make_unique<Transaction>(
        std::vector<RecordKey>{}, std::vector<RecordKey>{{0, 0}, {0, 5}},
        [](std::span<const ReadValue>, std::span<WriteValue> w) {
          store_i64(w[0].bytes, 9);
          return Outcome::kAbort;
        }));
    e->drain();
    auto s = e->snapshot();
    CHECK(s.size() == 1);
    CHECK(i64_of(s.at({0, 0})) == 0);
    CHECK(e->stats().logical_aborts == 1);
  }
}

TEST_CASE("baselines: high-contention YCSB stays serializable") {
  for (std::string kind : {"2pl", "occ"}) {
    CAPTURE(kind);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kYcsb10RMW;
    spec.theta = 0.9;
    spec.db_size = 200;
    spec.record_size = 16;
    auto e = make(kind, cfg(8));
    auto init = load_workload(*e, spec);
    e->start();
    TxnGenerator g(spec);
    for (int i = 0; i < 5000; ++i) e->submit(g.next());
    e->drain();
    auto r = verify_against_replay(*e, init);
    CHECK_MESSAGE(r.ok(), r.first_problem);
    std::int64_t sum = 0;
    for (const auto& [k, v] : e->snapshot()) sum += i64_of(v);
    std::int64_t base = 0;
    for (const auto& [k, v] : init) base += i64_of(v);
    CHECK(sum - base == 5000 * 10);
    if (kind == "2pl") CHECK(static_cast<TwoPlEngine&>(*e).lock_census() == 0);
  }
}

TEST_CASE("baselines: lifecycle and config errors") {
  CHECK_THROWS_AS(TwoPlEngine(cfg(0)), ConfigError);
  TwoPlEngine e(cfg(1));
  CHECK_THROWS(e.submit(incr({{0, 0}})));
  e.create_table(0, 8, 4);
  CHECK_THROWS_AS(e.create_table(0, 8, 4), ConfigError);
  std::vector<Record> dup{{1, i64_payload(0)}, {1, i64_payload(1)}};
  CHECK_THROWS_AS(e.bulk_load(0, dup), DuplicateKey);
  e.start();
  CHECK_THROWS(e.bulk_load(0, dup));
  CHECK_THROWS(e.snapshot());
  e.drain();
  CHECK_THROWS(e.submit(incr({{0, 0}})));
  CHECK_NOTHROW(e.drain());
  CHECK_THROWS(TwoPlEngine(cfg(1, false)).serial_order());
}
