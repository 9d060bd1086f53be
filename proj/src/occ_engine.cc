#include "bohm/occ_engine.h"

#include <algorithm>

namespace bohm {

namespace {

// Copies the row's value consistently with its tid. Returns the unlocked tid
// observed on both sides of the copy.
std::uint64_t stable_read(const Row& row, std::span<std::byte> buf,
                          bool& present, std::uint64_t lock_bit) {
  Backoff b;
  for (;;) {
    std::uint64_t t1 = row.tid.load(std::memory_order_acquire);
    if (t1 & lock_bit) {
      b.pause();
      continue;
    }
    present = row.present.load(std::memory_order_relaxed);
    if (present) row.read_into(buf);
    std::atomic_thread_fence(std::memory_order_acquire);
    std::uint64_t t2 = row.tid.load(std::memory_order_relaxed);
    if (t1 == t2) return t1;
    b.pause();
  }
}

}  // namespace

OccEngine::OccEngine(BaselineConfig config, OccConfig occ)
    : SingleVersionEngine(config), occ_(occ) {
  if (occ_.epoch_period.count() <= 0)
    throw ConfigError("epoch period must be positive");
}

OccEngine::~OccEngine() {
  shutdown();
  on_stop();
}

void OccEngine::on_start() {
  workers_.resize(config_.workers);
  epoch_thread_ = std::thread([this] { epoch_loop(); });
}

void OccEngine::on_stop() {
  {
    std::lock_guard<std::mutex> lock(epoch_mu_);
    epoch_stop_ = true;
  }
  epoch_cv_.notify_all();
  if (epoch_thread_.joinable()) epoch_thread_.join();
}

void OccEngine::epoch_loop() {
  std::unique_lock<std::mutex> lock(epoch_mu_);
  while (!epoch_cv_.wait_for(lock, occ_.epoch_period,
                             [&] { return epoch_stop_; }))
    epoch_.fetch_add(1, std::memory_order_acq_rel);
}

OccEngine::Attempt OccEngine::attempt(Transaction& txn, WorkerState& w,
                                      Scratch& s, std::uint64_t& seq) {
  // Read phase.
  std::size_t off = 0;
  for (std::size_t i = 0; i < txn.read_set.size(); ++i) {
    Row& row = *w.read_rows[i];
    std::span<std::byte> buf(s.read_buf.data() + off, row.size);
    off += row.size;
    bool present = false;
    w.read_tids[i] = stable_read(row, buf, present, kLockBit);
    s.reads[i] = present ? ReadValue{buf, true} : ReadValue{{}, false};
  }
  std::fill(s.write_buf.begin(), s.write_buf.end(), std::byte{0});
  for (auto& wv : s.writes) wv.tombstone = false;
  Outcome out = txn.logic(s.reads, s.writes);

  // Lock the write set in key order.
  const bool writes = out == Outcome::kCommit && !txn.write_set.empty();
  std::size_t locked = 0;
  if (writes) {
    for (; locked < w.write_order.size(); ++locked) {
      Row& row = *w.write_rows[w.write_order[locked].second];
      Backoff b;
      for (;;) {
        std::uint64_t t = row.tid.load(std::memory_order_relaxed);
        if (!(t & kLockBit) &&
            row.tid.compare_exchange_weak(t, t | kLockBit,
                                          std::memory_order_acquire))
          break;
        b.pause();
      }
    }
  }
  std::atomic_thread_fence(std::memory_order_seq_cst);
  const std::uint64_t epoch = epoch_.load(std::memory_order_acquire);
  seq = config_.retain_log ? next_serial() : 0;

  // Validation: every read row still carries the tid we saw, and nobody
  // else holds its lock.
  auto unlock_all = [&] {
    for (std::size_t k = 0; k < locked; ++k) {
      Row& row = *w.write_rows[w.write_order[k].second];
      row.tid.fetch_and(~kLockBit, std::memory_order_release);
    }
  };
  std::uint64_t max_seen = 0;
  for (std::size_t i = 0; i < txn.read_set.size(); ++i) {
    const Row& row = *w.read_rows[i];
    std::uint64_t t = row.tid.load(std::memory_order_acquire);
    bool mine = writes && std::find(w.write_rows.begin(), w.write_rows.end(),
                                    &row) != w.write_rows.end();
    if ((t & ~kLockBit) != w.read_tids[i] || ((t & kLockBit) && !mine)) {
      unlock_all();
      return Attempt::kConflict;
    }
    max_seen = std::max(max_seen, w.read_tids[i]);
  }

  record_reads(txn, s);
  txn.aborted = out == Outcome::kAbort;
  if (!writes) return Attempt::kCommitted;

  for (Row* row : w.write_rows)
    max_seen = std::max(max_seen, row->tid.load(std::memory_order_relaxed) & ~kLockBit);
  std::uint64_t tid = std::max({max_seen + 1, w.last_tid + 1, epoch << 32});
  w.last_tid = tid;

  for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
    Row& row = *w.write_rows[j];
    if (s.writes[j].tombstone) {
      row.present.store(false, std::memory_order_relaxed);
    } else {
      row.write_from(s.writes[j].bytes);
      row.present.store(true, std::memory_order_relaxed);
    }
  }
  for (Row* row : w.write_rows) row->tid.store(tid, std::memory_order_release);
  return Attempt::kCommitted;
}

std::uint64_t OccEngine::run(Transaction& txn, std::size_t worker,
                             Scratch& s) {
  WorkerState& w = workers_[worker];
  prepare(txn, s);
  RowStore& rows = store();
  w.read_rows.resize(txn.read_set.size());
  w.read_tids.assign(txn.read_set.size(), 0);
  for (std::size_t i = 0; i < txn.read_set.size(); ++i)
    w.read_rows[i] = rows.get_or_create(txn.read_set[i],
                                        record_size(txn.read_set[i].table));
  w.write_rows.resize(txn.write_set.size());
  w.write_order.clear();
  for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
    w.write_rows[j] = rows.get_or_create(txn.write_set[j],
                                         record_size(txn.write_set[j].table));
    w.write_order.emplace_back(txn.write_set[j], j);
  }
  std::sort(w.write_order.begin(), w.write_order.end());

  std::uint64_t seq = 0;
  unsigned backoff = 0;
  while (attempt(txn, w, s, seq) == Attempt::kConflict) {
    bump(counters(worker).retries);
    // Exponential backoff, capped so a retry never sleeps for long.
    Backoff b;
    for (unsigned i = 0; i < (1u << backoff); ++i) b.pause();
    backoff = std::min(backoff + 1, 8u);
  }
  return seq;
}

}  // namespace bohm
