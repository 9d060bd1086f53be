#include "bohm/twopl_engine.h"

#include <algorithm>
#include <mutex>

namespace bohm {

namespace {

bool compatible_with_queue(const LockHead& head, LockMode mode) {
  if (!head.first) return true;
  if (mode == LockMode::kExclusive) return false;
  for (const LockRequest* r = head.first; r; r = r->next)
    if (r->mode == LockMode::kExclusive) return false;
  return true;
}

void grant(LockRequest& r) {
  r.granted.store(true, std::memory_order_release);
  r.granted.notify_one();
}

}  // namespace

TwoPlEngine::~TwoPlEngine() { shutdown(); }

void TwoPlEngine::on_start() { plans_.resize(config_.workers); }

void TwoPlEngine::acquire(LockRequest& req) {
  Row& row = *req.row;
  req.next = nullptr;
  {
    std::lock_guard<SpinLatch> guard(store().latch(row));
    LockHead& head = row.lock;
    bool now = compatible_with_queue(head, req.mode);
    req.granted.store(now, std::memory_order_relaxed);
    if (head.last)
      head.last->next = &req;
    else
      head.first = &req;
    head.last = &req;
    if (now) return;
  }
  Backoff b;
  for (int i = 0; i < 16; ++i) {
    if (req.granted.load(std::memory_order_acquire)) return;
    b.pause();
  }
  while (!req.granted.load(std::memory_order_acquire))
    req.granted.wait(false, std::memory_order_acquire);
}

void TwoPlEngine::release(LockRequest& req) {
  Row& row = *req.row;
  std::lock_guard<SpinLatch> guard(store().latch(row));
  LockHead& head = row.lock;
  LockRequest* before = nullptr;
  for (LockRequest* r = head.first; r != &req; r = r->next) before = r;
  if (before)
    before->next = req.next;
  else
    head.first = req.next;
  if (head.last == &req) head.last = before;

  // Grant the new front of the queue: one writer, or a run of readers.
  LockRequest* r = head.first;
  if (!r) return;
  if (r->mode == LockMode::kExclusive) {
    if (!r->granted.load(std::memory_order_relaxed)) grant(*r);
    return;
  }
  for (; r && r->mode == LockMode::kShared; r = r->next)
    if (!r->granted.load(std::memory_order_relaxed)) grant(*r);
}

std::uint64_t TwoPlEngine::run(Transaction& txn, std::size_t worker,
                               Scratch& s) {
  LockPlan& plan = plans_[worker];
  prepare(txn, s);
  RowStore& rows = store();

  // Everything allocated here, before the first acquisition.
  std::vector<RecordKey> keys(txn.read_set);
  keys.insert(keys.end(), txn.write_set.begin(), txn.write_set.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (plan.requests.size() < keys.size())
    plan.requests = std::vector<LockRequest>(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    bool writes = std::find(txn.write_set.begin(), txn.write_set.end(),
                            keys[i]) != txn.write_set.end();
    LockRequest& r = plan.requests[i];
    r.mode = writes ? LockMode::kExclusive : LockMode::kShared;
    r.row = rows.get_or_create(keys[i], record_size(keys[i].table));
  }
  plan.read_rows.resize(txn.read_set.size());
  plan.write_rows.resize(txn.write_set.size());
  for (std::size_t i = 0; i < txn.read_set.size(); ++i)
    plan.read_rows[i] = rows.find(txn.read_set[i]);
  for (std::size_t j = 0; j < txn.write_set.size(); ++j)
    plan.write_rows[j] = rows.find(txn.write_set[j]);

  for (std::size_t i = 0; i < keys.size(); ++i) acquire(plan.requests[i]);
  const std::uint64_t seq = config_.retain_log ? next_serial() : 0;

  std::size_t off = 0;
  for (std::size_t i = 0; i < txn.read_set.size(); ++i) {
    Row& row = *plan.read_rows[i];
    std::span<std::byte> buf(s.read_buf.data() + off, row.size);
    off += row.size;
    if (row.present.load(std::memory_order_relaxed)) {
      row.read_into(buf);
      s.reads[i] = ReadValue{buf, true};
    } else {
      s.reads[i] = ReadValue{{}, false};
    }
  }
  Outcome out = txn.logic(s.reads, s.writes);
  record_reads(txn, s);
  txn.aborted = out == Outcome::kAbort;
  if (!txn.aborted) {
    for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
      Row& row = *plan.write_rows[j];
      if (s.writes[j].tombstone) {
        row.present.store(false, std::memory_order_relaxed);
      } else {
        row.write_from(s.writes[j].bytes);
        row.present.store(true, std::memory_order_relaxed);
      }
    }
  }

  for (std::size_t i = keys.size(); i-- > 0;) release(plan.requests[i]);
  return seq;
}

std::size_t TwoPlEngine::lock_census() const {
  std::size_t n = 0;
  const RowStore* rows = store_if_loaded();
  if (!rows) return 0;
  rows->for_each([&](const Row& r) {
    std::lock_guard<SpinLatch> guard(rows->latch(r));
    for (const LockRequest* q = r.lock.first; q; q = q->next) ++n;
  });
  return n;
}

}  // namespace bohm
