#include <atomic>
#include <thread>

#include "bohm/cc_layer.h"
#include "doctest.h"
#include "support.h"

using namespace bohm;

namespace {

Outcome noop(std::span<const ReadValue>, std::span<WriteValue>) { return Outcome::kCommit; }

std::unique_ptr<Transaction> make(std::vector<RecordKey> r, std::vector<RecordKey> w,
                                  Timestamp ts) {
  auto t = std::make_unique<Transaction>(std::move(r), std::move(w), noop);
  t->ts = ts;
  return t;
}

// First key >= start that lands in partition p of m.
std::uint64_t key_in(std::size_t p, std::size_t m, std::uint64_t start = 0) {
  for (std::uint64_t k = start;; ++k)
    if (partition_of({0, k}, m) == p) return k;
}

// Walks every chain: continuity (prev.end == begin), strictly decreasing
// begin, and an open-ended head.
std::size_t chain_violations(const Storage& s, TableId t) {
  std::size_t bad = 0;
  s.index(t).for_each([&](const IndexEntry& e) {
    const Version* v = e.head.load();
    if (!v) return;
    if (v->end_ts() != kInfinity) ++bad;
    for (; v; v = v->prev()) {
      if (v->begin_ts() >= v->end_ts()) ++bad;
      if (const Version* p = v->prev()) {
        if (p->end_ts() != v->begin_ts()) ++bad;
        if (p->begin_ts() >= v->begin_ts()) ++bad;
      }
    }
  });
  return bad;
}

}  // namespace

TEST_CASE("placeholder over an existing head closes the head at the writer's ts") {
  Storage s(1);
  s.create_table(0, 8, 4);
  CcPartition part(0, s, true);
  auto t100 = make({}, {{0, 1}}, 100);
  auto t200 = make({}, {{0, 1}}, 200);
  Version* v100 = part.install_placeholder({0, 1}, *t100, 0, 1);
  Version* v200 = part.install_placeholder({0, 1}, *t200, 0, 1);
  CHECK(v100->end_ts() == 200);
  CHECK(v200->begin_ts() == 200);
  CHECK(v200->end_ts() == kInfinity);
  CHECK(v200->prev() == v100);
  CHECK(v200->producer() == t200.get());
  CHECK_FALSE(v200->published());
  CHECK(t200->write_refs[0] == v200);
  CHECK(s.index_get({0, 1}) == v200);
}

TEST_CASE("first write to an absent key inserts into the index") {
  Storage s(1);
  s.create_table(0, 8, 4);
  CcPartition part(0, s, true);
  auto t = make({}, {{0, 77}}, 5);
  CHECK(s.index_get({0, 77}) == nullptr);
  Version* v = part.install_placeholder({0, 77}, *t, 0, 1);
  CHECK(v->begin_ts() == 5);
  CHECK(v->end_ts() == kInfinity);
  CHECK(v->prev() == nullptr);
  CHECK(s.index_get({0, 77}) == v);
  CHECK(part.deferred_count() == 0);
}

TEST_CASE("two writes in one batch chain in timestamp order") {
  Storage s(1);
  s.create_table(0, 8, 4);
  s.bulk_load(0, std::vector<Record>{{3, testing::i64_payload(0)}});
  Batch b;
  b.id = 1;
  b.txns.push_back(make({}, {{0, 3}}, 7));
  b.txns.push_back(make({}, {{0, 3}}, 9));
  CcPartition part(0, s, true);
  part.process_batch(b);
  Version* head = s.index_get({0, 3});
  CHECK(head->begin_ts() == 9);
  CHECK(head->end_ts() == kInfinity);
  CHECK(head->prev()->begin_ts() == 7);
  CHECK(head->prev()->end_ts() == 9);
  CHECK(head->prev()->prev()->begin_ts() == 0);
  CHECK(head->prev()->prev()->end_ts() == 7);
  CHECK(chain_violations(s, 0) == 0);
}

TEST_CASE("annotation references the current head") {
  Storage s(1);
  s.create_table(0, 8, 4);
  s.bulk_load(0, std::vector<Record>{{1, testing::i64_payload(0)}});
  CcPartition part(0, s, true);
  auto w = make({}, {{0, 1}}, 100);
  Version* v100 = part.install_placeholder({0, 1}, *w, 0, 1);

  SUBCASE("read-only") {
    auto r = make({{0, 1}}, {}, 200);
    part.annotate_read({0, 1}, *r, 0);
    CHECK(r->read_refs[0] == v100);
  }
  SUBCASE("an RMW reads its predecessor") {
    Batch b;
    b.id = 2;
    b.txns.push_back(make({{0, 1}}, {{0, 1}}, 200));
    part.process_batch(b);
    CHECK(b.txns[0]->read_refs[0] == v100);
    CHECK(b.txns[0]->write_refs[0]->prev() == v100);
  }
  SUBCASE("absent key leaves the slot empty") {
    auto r = make({{0, 99}}, {}, 200);
    part.annotate_read({0, 99}, *r, 0);
    CHECK(r->read_refs[0] == nullptr);
  }
}

TEST_CASE("annotation disabled leaves read refs unset") {
  Storage s(1);
  s.create_table(0, 8, 4);
  s.bulk_load(0, std::vector<Record>{{1, testing::i64_payload(0)}});
  CcPartition part(0, s, false);
  Batch b;
  b.id = 1;
  b.txns.push_back(make({{0, 1}}, {}, 1));
  part.process_batch(b);
  CHECK(b.txns[0]->read_refs[0] == nullptr);
}

TEST_CASE("each partition installs only the keys it owns") {
  // One txn writing four records spread 1/2/1 over three partitions.
  Storage s(3);
  s.create_table(0, 8, 16);
  const std::uint64_t a = key_in(0, 3), b = key_in(1, 3), c = key_in(1, 3, b + 1),
                      d = key_in(2, 3);
  Batch batch;
  batch.id = 1;
  batch.txns.push_back(make({}, {{0, a}, {0, b}, {0, c}, {0, d}}, 1));
  std::vector<std::unique_ptr<CcPartition>> parts;
  for (std::uint32_t p = 0; p < 3; ++p) parts.push_back(std::make_unique<CcPartition>(p, s, true));
  for (auto& p : parts) {
    instrument::set_current_partition(p->id());
    p->process_batch(batch);
  }
  instrument::set_current_partition(instrument::kNoPartition);
  CHECK(parts[0]->stats().installed == 1);
  CHECK(parts[1]->stats().installed == 2);
  CHECK(parts[2]->stats().installed == 1);
  for (auto* v : batch.txns[0]->write_refs) CHECK(v != nullptr);
}

TEST_CASE("a partition with nothing to do installs nothing") {
  Storage s(2);
  s.create_table(0, 8, 16);
  Batch batch;
  batch.id = 1;
  batch.txns.push_back(make({}, {{0, key_in(0, 2)}}, 1));
  CcPartition idle(1, s, true);
  idle.process_batch(batch);
  CHECK(idle.stats().installed == 0);
  Batch empty;
  idle.process_batch(empty);
  CHECK(idle.stats().installed == 0);
}

TEST_CASE("barrier releases nobody until the last party arrives") {
  SenseBarrier barrier(3);
  std::atomic<int> released{0}, completions{0};
  std::atomic<int> last_arriver{-1};
  auto party = [&](int id) {
    bool sense = false;
    if (barrier.arrive_and_wait(sense, [&] { ++completions; })) last_arriver = id;
    ++released;
  };
  std::thread t2(party, 2);
  std::thread t0(party, 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(released == 0);
  std::thread t1(party, 1);
  t0.join();
  t1.join();
  t2.join();
  CHECK(released == 3);
  CHECK(completions == 1);
  CHECK(last_arriver == 1);
}

TEST_CASE("barrier is reusable across rounds and trivial with one party") {
  SenseBarrier one(1);
  bool sense = false;
  int done = 0;
  for (int i = 0; i < 5; ++i) CHECK(one.arrive_and_wait(sense, [&] { ++done; }));
  CHECK(done == 5);

  SenseBarrier four(4);
  std::atomic<int> rounds{0};
  std::vector<std::thread> ts;
  for (int p = 0; p < 4; ++p)
    ts.emplace_back([&] {
      bool s = false;
      for (int r = 0; r < 200; ++r) four.arrive_and_wait(s, [&] { ++rounds; });
    });
  for (auto& t : ts) t.join();
  CHECK(rounds == 200);
}

TEST_CASE("cc threads keep single-writer metadata and chain invariants") {
  constexpr std::size_t kParts = 4;
  Storage s(kParts);
  s.create_table(0, 8, 64);
  s.create_table(1, 8, 64);
  std::vector<Record> load;
  for (std::uint64_t k = 0; k < 32; ++k) load.emplace_back(k, testing::i64_payload(k));
  s.bulk_load(0, load);

  testing::RandomTxnGen gen(11, 48);
  std::vector<Batch> batches(20);
  Timestamp ts = 1;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    batches[b].id = b + 1;
    batches[b].base_ts = ts;
    for (int i = 0; i < 50; ++i) {
      auto t = gen.next();
      t->ts = ts++;
      batches[b].txns.push_back(std::move(t));
    }
  }
  std::vector<std::unique_ptr<CcPartition>> parts;
  for (std::uint32_t p = 0; p < kParts; ++p)
    parts.push_back(std::make_unique<CcPartition>(p, s, true));

  instrument::reset();
  SenseBarrier barrier(kParts);
  std::vector<std::thread> threads;
  for (std::uint32_t p = 0; p < kParts; ++p)
    threads.emplace_back([&, p] {
      instrument::set_current_partition(p);
      bool sense = false;
      for (auto& b : batches) {
        parts[p]->process_batch(b);
        barrier.arrive_and_wait(sense, [] {});
      }
    });
  for (auto& t : threads) t.join();

  CHECK(instrument::counters().single_writer_violations == 0);
  CHECK(instrument::counters().annotate_shared_writes == 0);
  CHECK(chain_violations(s, 0) == 0);
  CHECK(chain_violations(s, 1) == 0);

  // After the barrier: every write has a placeholder; every annotated read
  // is the latest version strictly before the reader.
  std::size_t bad = 0;
  for (auto& b : batches)
    for (auto& t : b.txns) {
      for (auto* v : t->write_refs) bad += v == nullptr || v->begin_ts() != t->ts;
      for (std::size_t i = 0; i < t->read_set.size(); ++i) {
        const Version* r = t->read_refs[i];
        // Reference: walk from the final head to the first begin < ts.
        const Version* want = s.has_table(t->read_set[i].table)
                                   ? s.index_get(t->read_set[i])
                                   : nullptr;
        while (want && want->begin_ts() >= t->ts) want = want->prev();
        bad += r != want;
        if (r) bad += r->begin_ts() >= t->ts;
      }
    }
  CHECK(bad == 0);
}

TEST_CASE("gc reclaims exactly the versions superseded at or below the watermark") {
  Storage s(1);
  s.create_table(0, 8, 4);
  s.bulk_load(0, std::vector<Record>{{1, testing::i64_payload(0)}});
  CcPartition part(0, s, true);
  std::vector<const Version*> seen;
  part.set_reclaim_observer([&](const Version& v) { seen.push_back(&v); });
  Version* loaded = s.index_get({0, 1});

  auto t2 = make({}, {{0, 1}}, 10);
  auto t4 = make({}, {{0, 1}}, 20);
  Version* v2 = part.install_placeholder({0, 1}, *t2, 0, 2);
  Version* v4 = part.install_placeholder({0, 1}, *t4, 0, 4);
  CHECK(part.deferred_count() == 2);

  CHECK(part.gc_reclaim(1, false) == 0);
  CHECK(part.gc_reclaim(3, true) == 1);  // superseded in 2 <= 3
  REQUIRE(seen.size() == 1);
  CHECK(seen[0] == loaded);
  CHECK(loaded->poisoned());
  CHECK(v2->prev() == nullptr);
  CHECK(part.deferred_count() == 1);     // superseded in 4 > 3
  CHECK(v4->prev() == v2);
  CHECK(part.gc_reclaim(4, false) == 1);
  CHECK(v4->prev() == nullptr);
}
