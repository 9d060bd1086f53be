#include "bohm/bohm_engine.h"

#include <stdexcept>

#include "bohm/threads.h"

namespace bohm {

namespace {

BohmConfig validated(BohmConfig c) {
  if (c.cc_threads == 0) throw ConfigError("cc_threads must be >= 1");
  if (c.exec_threads == 0) throw ConfigError("exec_threads must be >= 1");
  if (c.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (c.queue_depth == 0) throw ConfigError("queue_depth must be >= 1");
  if (c.max_recursion < 0) throw ConfigError("max_recursion must be >= 0");
  return c;
}

}  // namespace

BohmEngine::BohmEngine(BohmConfig config)
    : config_(validated(std::move(config))),
      storage_(config_.cc_threads),
      // Loaded versions carry begin_ts 0, so the log starts at 1. Batch 0
      // means "nothing executed yet" in the watermark.
      sequencer_(1, 1),
      barrier_(config_.cc_threads),
      watermark_(config_.exec_threads),
      ring_(2 * config_.queue_depth + 2, nullptr) {
  for (std::size_t p = 0; p < config_.cc_threads; ++p) {
    partitions_.push_back(std::make_unique<CcPartition>(
        static_cast<std::uint32_t>(p), storage_, config_.annotate_reads));
    if (config_.on_reclaim) partitions_.back()->set_reclaim_observer(config_.on_reclaim);
  }
  ExecConfig ec;
  ec.annotated_reads = config_.annotate_reads;
  ec.max_recursion = config_.max_recursion;
  ec.record_reads = config_.retain_log;
  ec.check_poison = config_.poison_reclaimed;
  for (std::size_t i = 0; i < config_.exec_threads; ++i)
    executors_.push_back(std::make_unique<Executor>(storage_, ec));
}

BohmEngine::~BohmEngine() {
  if (started_ && !drained_) {
    try {
      drain();
    } catch (...) {
    }
  }
}

void BohmEngine::create_table(TableId id, std::uint32_t record_size,
                              std::size_t expected_keys) {
  if (started_) throw std::logic_error("create_table after start");
  storage_.create_table(id, record_size, expected_keys);
}

void BohmEngine::bulk_load(TableId id, std::span<const Record> records) {
  if (started_) throw std::logic_error("bulk_load after start");
  storage_.bulk_load(id, records);
}

void BohmEngine::start() {
  if (started_) throw std::logic_error("engine already started");
  started_ = true;
  for (std::size_t p = 0; p < config_.cc_threads; ++p)
    threads_.emplace_back([this, p] { cc_loop(p); });
  for (std::size_t i = 0; i < config_.exec_threads; ++i)
    threads_.emplace_back([this, i] { exec_loop(i); });
}

void BohmEngine::submit(std::unique_ptr<Transaction> txn) {
  if (!started_) throw std::logic_error("submit before start");
  sequencer_.enqueue(std::move(txn));
  if (sequencer_.pending() >= config_.batch_size)
    dispatch(sequencer_.seal_batch(config_.batch_size));
}

void BohmEngine::dispatch(std::unique_ptr<Batch> batch) {
  const BatchId id = batch->id;
  const BatchId depth = config_.queue_depth;
  // Bounded hand-off: at most queue_depth batches waiting for the cc layer
  // and 2*queue_depth not yet executed everywhere.
  progress_bell_.wait_until([&] {
    return id - cc_done_.load(std::memory_order_acquire) <= depth &&
           id - watermark_.min_done() <= 2 * depth;
  });
  ring_[id % ring_.size()] = batch.get();
  {
    std::lock_guard<std::mutex> lock(owned_mu_);
    owned_.push_back(OwnedBatch{std::move(batch), 0});
  }
  sealed_.store(id, std::memory_order_release);
  seal_bell_.ring();
}

void BohmEngine::drain() {
  if (!started_) throw std::logic_error("drain before start");
  if (drained_) return;
  sequencer_.begin_drain();
  while (sequencer_.pending() > 0)
    dispatch(sequencer_.seal_batch(config_.batch_size));

  const BatchId last = sealed_.load(std::memory_order_acquire);
  progress_bell_.wait_until([&] { return watermark_.min_done() >= last; });

  stop_.store(true, std::memory_order_release);
  seal_bell_.ring();
  release_bell_.ring();
  for (auto& t : threads_) t.join();
  threads_.clear();
  watermark_.tick();
  drained_ = true;
}

void BohmEngine::cc_loop(std::size_t p) {
  if (config_.pin_threads) pin_current_thread(p);
  instrument::set_current_partition(static_cast<std::uint32_t>(p));
  CcPartition& part = *partitions_[p];
  bool sense = false;
  for (BatchId next = 1;; ++next) {
    seal_bell_.wait_until([&] {
      return sealed_.load(std::memory_order_acquire) >= next ||
             stop_.load(std::memory_order_acquire);
    });
    if (sealed_.load(std::memory_order_acquire) < next) break;
    Batch& batch = *slot(next);

    if (config_.gc) {
      auto n = part.gc_reclaim(watermark_.low_watermark(),
                               config_.poison_reclaimed);
      if (n) gc_reclaimed_.fetch_add(n, std::memory_order_relaxed);
    }
    part.process_batch(batch);

    barrier_.arrive_and_wait(sense, [&] {
      cc_done_.store(next, std::memory_order_release);
      release_bell_.ring();
      progress_bell_.ring();
    });
  }
  instrument::set_current_partition(instrument::kNoPartition);
}

void BohmEngine::exec_loop(std::size_t i) {
  if (config_.pin_threads) pin_current_thread(config_.cc_threads + i);
  Executor& exec = *executors_[i];
  for (BatchId next = 1;; ++next) {
    release_bell_.wait_until([&] {
      return cc_done_.load(std::memory_order_acquire) >= next ||
             stop_.load(std::memory_order_acquire);
    });
    if (cc_done_.load(std::memory_order_acquire) < next) break;

    exec.process_batch(*slot(next), i, config_.exec_threads);
    watermark_.finish(i, next);
    if (i == 0) {
      watermark_.tick();
      retire_batches();
    }
    progress_bell_.ring();
  }
}

// A batch's transactions may still be referenced through a version's
// producer pointer by a reader that loaded it before the batch finished.
// Such a reader is working on a batch no later than cc_done at the time the
// batch finished, so the batch is freed once the watermark passes that.
void BohmEngine::retire_batches() {
  if (config_.retain_log) return;
  const BatchId w = watermark_.low_watermark();
  std::lock_guard<std::mutex> lock(owned_mu_);
  for (auto& ob : owned_) {
    if (ob.batch->id > w) break;
    if (ob.retire_after == 0)
      ob.retire_after = cc_done_.load(std::memory_order_acquire);
  }
  while (!owned_.empty() && owned_.front().retire_after != 0 &&
         owned_.front().retire_after <= w)
    owned_.pop_front();
}

EngineStats BohmEngine::stats() const {
  EngineStats s;
  for (const auto& e : executors_) {
    const auto& c = e->counters();
    s.committed += c.committed.load(std::memory_order_relaxed);
    s.ops += c.ops.load(std::memory_order_relaxed);
    s.logical_aborts += c.logical_aborts.load(std::memory_order_relaxed);
    s.deferred += c.deferred.load(std::memory_order_relaxed);
  }
  s.gc_reclaimed = gc_reclaimed_.load(std::memory_order_relaxed);
  BatchId done = cc_done_.load(std::memory_order_relaxed);
  BatchId low = watermark_.low_watermark();
  s.watermark_lag = done > low ? done - low : 0;
  return s;
}

DbState BohmEngine::snapshot() const {
  if (started_ && !drained_)
    throw std::logic_error("snapshot requires a drained engine");
  return storage_.snapshot();
}

std::vector<const Transaction*> BohmEngine::serial_order() const {
  if (!config_.retain_log)
    throw std::logic_error("serial_order requires retain_log");
  std::vector<const Transaction*> out;
  std::lock_guard<std::mutex> lock(owned_mu_);
  for (const auto& ob : owned_)
    for (const auto& t : ob.batch->txns) out.push_back(t.get());
  return out;
}

}  // namespace bohm
