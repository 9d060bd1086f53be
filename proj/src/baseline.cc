#include "bohm/baseline.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "bohm/threads.h"

namespace bohm {

void TxnQueue::push(std::unique_ptr<Transaction> txn) {
  std::unique_lock<std::mutex> lock(mu_);
  not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
  if (closed_) throw std::logic_error("push on a closed queue");
  items_.push_back(std::move(txn));
  not_empty_.notify_one();
}

std::unique_ptr<Transaction> TxnQueue::pop() {
  std::unique_lock<std::mutex> lock(mu_);
  not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return nullptr;
  auto txn = std::move(items_.front());
  items_.pop_front();
  not_full_.notify_one();
  return txn;
}

void TxnQueue::close() {
  std::lock_guard<std::mutex> lock(mu_);
  closed_ = true;
  not_empty_.notify_all();
  not_full_.notify_all();
}

SingleVersionEngine::SingleVersionEngine(BaselineConfig config)
    : config_(config),
      queue_(config.queue_capacity),
      counters_(std::make_unique<WorkerCounters[]>(
          std::max<std::size_t>(config.workers, 1))) {
  if (config_.workers == 0) throw ConfigError("workers must be >= 1");
  if (config_.queue_capacity == 0) throw ConfigError("queue_capacity must be >= 1");
}

SingleVersionEngine::~SingleVersionEngine() {
  queue_.close();
  for (auto& t : threads_) t.join();
}

void SingleVersionEngine::shutdown() {
  if (started_ && !drained_) drain();
}

void SingleVersionEngine::create_table(TableId id, std::uint32_t record_size,
                                       std::size_t expected_keys) {
  if (started_) throw std::logic_error("create_table after start");
  if (!record_sizes_.emplace(id, record_size).second)
    throw ConfigError("table " + std::to_string(id) + " already exists");
  expected_keys_ += expected_keys;
}

std::uint32_t SingleVersionEngine::record_size(TableId id) const {
  auto it = record_sizes_.find(id);
  if (it == record_sizes_.end())
    throw std::out_of_range("unknown table " + std::to_string(id));
  return it->second;
}

RowStore& SingleVersionEngine::store() {
  if (!store_) store_ = std::make_unique<RowStore>(expected_keys_);
  return *store_;
}

void SingleVersionEngine::bulk_load(TableId id, std::span<const Record> records) {
  if (started_) throw std::logic_error("bulk_load after start");
  const std::uint32_t size = record_size(id);
  std::vector<std::uint64_t> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back(r.first);
  std::sort(keys.begin(), keys.end());
  auto dup = std::adjacent_find(keys.begin(), keys.end());
  if (dup != keys.end())
    throw DuplicateKey("duplicate key " + std::to_string(*dup) +
                       " in load set for table " + std::to_string(id));
  RowStore& s = store();
  for (auto k : keys) {
    const Row* r = s.find(RecordKey{id, k});
    if (r && r->present.load(std::memory_order_relaxed))
      throw DuplicateKey("key " + std::to_string(k) +
                         " already loaded in table " + std::to_string(id));
  }
  for (const auto& [k, bytes] : records) {
    Row* row = s.get_or_create(RecordKey{id, k}, size);
    row->write_from(bytes);
    row->present.store(true, std::memory_order_relaxed);
  }
}

void SingleVersionEngine::start() {
  if (started_) throw std::logic_error("engine already started");
  store();
  started_ = true;
  on_start();
  for (std::size_t w = 0; w < config_.workers; ++w)
    threads_.emplace_back([this, w] { worker_loop(w); });
}

void SingleVersionEngine::submit(std::unique_ptr<Transaction> txn) {
  if (!started_) throw std::logic_error("submit before start");
  if (drained_) throw std::logic_error("submit after drain");
  queue_.push(std::move(txn));
}

void SingleVersionEngine::drain() {
  if (!started_) throw std::logic_error("drain before start");
  if (drained_) return;
  queue_.close();
  for (auto& t : threads_) t.join();
  threads_.clear();
  on_stop();
  drained_ = true;
}

void SingleVersionEngine::worker_loop(std::size_t worker) {
  if (config_.pin_threads) pin_current_thread(worker);
  Scratch scratch;
  WorkerCounters& c = counters_[worker];
  while (auto txn = queue_.pop()) {
    std::uint64_t seq = run(*txn, worker, scratch);
    txn->state.store(TxnState::kComplete, std::memory_order_release);
    bump(c.committed);
    bump(c.ops, txn->op_count());
    if (txn->aborted) bump(c.logical_aborts);
    if (config_.retain_log) {
      std::lock_guard<std::mutex> lock(log_mu_);
      log_.emplace_back(seq, std::move(txn));
    }
  }
}

void SingleVersionEngine::prepare(const Transaction& txn, Scratch& s) const {
  std::size_t rbytes = 0;
  for (const auto& k : txn.read_set) rbytes += record_size(k.table);
  s.read_buf.assign(rbytes, std::byte{0});
  s.reads.assign(txn.read_set.size(), ReadValue{});

  std::size_t wbytes = 0;
  for (const auto& k : txn.write_set) wbytes += record_size(k.table);
  s.write_buf.assign(wbytes, std::byte{0});
  s.writes.resize(txn.write_set.size());
  std::size_t off = 0;
  for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
    std::size_t sz = record_size(txn.write_set[j].table);
    s.writes[j] = WriteValue{std::span<std::byte>(s.write_buf.data() + off, sz),
                             false};
    off += sz;
  }
}

void SingleVersionEngine::record_reads(Transaction& txn, const Scratch& s) const {
  if (!config_.retain_log) return;
  txn.observed.clear();
  for (const auto& r : s.reads) append_observed(txn.observed, r);
}

EngineStats SingleVersionEngine::stats() const {
  EngineStats s;
  for (std::size_t w = 0; w < config_.workers; ++w) {
    const auto& c = counters_[w];
    s.committed += c.committed.load(std::memory_order_relaxed);
    s.ops += c.ops.load(std::memory_order_relaxed);
    s.logical_aborts += c.logical_aborts.load(std::memory_order_relaxed);
    s.retries += c.retries.load(std::memory_order_relaxed);
  }
  return s;
}

DbState SingleVersionEngine::snapshot() const {
  if (started_ && !drained_)
    throw std::logic_error("snapshot requires a drained engine");
  DbState state;
  if (!store_) return state;
  store_->for_each([&](const Row& r) {
    if (!r.present.load(std::memory_order_acquire)) return;
    Payload bytes(r.size);
    r.read_into(bytes);
    state.emplace(r.key, std::move(bytes));
  });
  return state;
}

std::vector<const Transaction*> SingleVersionEngine::serial_order() const {
  if (!config_.retain_log)
    throw std::logic_error("serial_order requires retain_log");
  std::lock_guard<std::mutex> lock(log_mu_);
  std::vector<std::pair<std::uint64_t, const Transaction*>> v;
  v.reserve(log_.size());
  for (const auto& [seq, t] : log_) v.emplace_back(seq, t.get());
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<const Transaction*> out;
  out.reserve(v.size());
  for (const auto& [seq, t] : v) out.push_back(t);
  return out;
}

}  // namespace bohm
