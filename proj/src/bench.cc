#include "bohm/bench.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "bohm/bohm_engine.h"
#include "bohm/occ_engine.h"
#include "bohm/threads.h"
#include "bohm/twopl_engine.h"

namespace bohm {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t workers_of(const RunConfig& c) {
  return c.worker_threads.value_or(c.exec_threads);
}

void write_row(std::ostream& os, const RunMetrics& m, double tps, double ops,
               std::uint64_t retries, std::uint64_t deferred,
               std::uint64_t reclaimed) {
  std::ostringstream row;
  row << m.engine << ',' << m.cc_threads << ',' << m.exec_threads << ','
      << m.workload << ',' << m.theta << ',';
  if (m.failed) {
    row << "nan,nan,nan,nan,nan";
  } else {
    row << std::fixed << std::setprecision(1) << tps << ',' << ops << ','
        << retries << ',' << deferred << ',' << reclaimed;
  }
  os << row.str() << '\n';
}

}  // namespace

std::unique_ptr<Engine> make_engine(const RunConfig& c, bool retain_log) {
  if (c.engine == "hekaton" || c.engine == "si")
    throw ConfigError("unsupported engine: " + c.engine);
  if (c.engine == "bohm") {
    if (c.worker_threads)
      throw ConfigError("worker_threads does not apply to engine=bohm; use cc/exec threads");
    BohmConfig bc;
    bc.cc_threads = c.cc_threads;
    bc.exec_threads = c.exec_threads;
    bc.batch_size = c.batch_size;
    bc.queue_depth = c.queue_depth;
    bc.annotate_reads = c.annotate_reads;
    bc.gc = c.gc;
    bc.poison_reclaimed = c.poison_reclaimed;
    bc.pin_threads = c.pin_threads;
    bc.retain_log = retain_log;
    return std::make_unique<BohmEngine>(bc);
  }
  if (c.engine == "2pl" || c.engine == "occ") {
    BaselineConfig bc;
    bc.workers = workers_of(c);
    bc.retain_log = retain_log;
    bc.pin_threads = c.pin_threads;
    if (c.engine == "2pl") return std::make_unique<TwoPlEngine>(bc);
    return std::make_unique<OccEngine>(bc);
  }
  throw ConfigError("unknown engine: " + c.engine);
}

RunMetrics run(const RunConfig& c) {
  RunMetrics m;
  m.engine = c.engine;
  m.workload = std::string(to_string(c.workload.kind));
  m.theta = c.workload.theta;
  const bool baseline = c.engine != "bohm";
  m.cc_threads = baseline ? 0 : c.cc_threads;
  m.exec_threads = baseline ? workers_of(c) : c.exec_threads;

  if (!c.txn_count && !(c.duration_seconds > 0))
    throw ConfigError("duration must be positive");
  if (c.warmup_seconds < 0) throw ConfigError("warmup must be >= 0");
  const std::size_t threads = baseline ? workers_of(c) : c.cc_threads + c.exec_threads;
  if (threads > hardware_threads()) {
    std::ostringstream w;
    w << "configured " << threads << " engine threads on " << hardware_threads()
      << " hardware threads";
    m.warnings.push_back(w.str());
  }

  auto engine = make_engine(c, c.verify);
  DbState initial = load_workload(*engine, c.workload);
  if (!c.verify) initial.clear();
  TxnGenerator gen(c.workload);
  engine->start();

  auto snap = [&] { return engine->stats(); };
  EngineStats base{};
  Clock::time_point t0;

  auto sample_loop = [&](auto&& keep_going) {
    auto next_tick = t0 + std::chrono::seconds(1);
    EngineStats last = base;
    std::uint64_t n = 0;
    while (keep_going(n)) {
      engine->submit(gen.next());
      ++n;
      if ((n & 63) == 0 && Clock::now() >= next_tick) {
        EngineStats s = snap();
        m.per_second.push_back(s.committed - last.committed);
        m.per_second_ops.push_back(s.ops - last.ops);
        last = s;
        next_tick += std::chrono::seconds(1);
      }
    }
  };

  if (c.txn_count) {
    t0 = Clock::now();
    const std::uint64_t total = *c.txn_count;
    sample_loop([&](std::uint64_t n) { return n < total; });
    engine->drain();
  } else {
    auto warm_end = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(c.warmup_seconds));
    while (Clock::now() < warm_end)
      for (int i = 0; i < 64; ++i) engine->submit(gen.next());
    base = snap();
    t0 = Clock::now();
    auto end = t0 + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double>(c.duration_seconds));
    sample_loop([&](std::uint64_t n) { return (n & 63) != 0 || Clock::now() < end; });
  }
  EngineStats fin = snap();
  auto t1 = Clock::now();
  if (!c.txn_count) engine->drain();

  m.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
  m.committed = fin.committed - base.committed;
  m.ops = fin.ops - base.ops;
  m.txns_per_sec = m.elapsed_seconds > 0 ? m.committed / m.elapsed_seconds : 0;
  m.ops_per_sec = m.elapsed_seconds > 0 ? m.ops / m.elapsed_seconds : 0;

  EngineStats all = engine->stats();
  m.retries = all.retries;
  m.logical_aborts = all.logical_aborts;
  m.deferred = all.deferred;
  m.gc_reclaimed = all.gc_reclaimed;
  m.watermark_lag = all.watermark_lag;
  if (auto* tp = dynamic_cast<TwoPlEngine*>(engine.get())) m.lock_census = tp->lock_census();

  if (c.verify) {
    m.verify = verify_against_replay(*engine, initial);
    m.final_digest = m.verify->engine_digest;
  }
  return m;
}

std::vector<RunMetrics> sweep(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw ConfigError("sweep needs at least one configuration");
  std::vector<RunMetrics> out;
  for (const auto& c : configs) {
    try {
      out.push_back(run(c));
    } catch (const std::exception& e) {
      RunMetrics m;
      m.engine = c.engine;
      m.workload = std::string(to_string(c.workload.kind));
      m.cc_threads = c.cc_threads;
      m.exec_threads = c.worker_threads.value_or(c.exec_threads);
      m.theta = c.workload.theta;
      m.failed = true;
      m.error = e.what();
      out.push_back(std::move(m));
    }
  }
  return out;
}

void write_summary_row(std::ostream& os, const RunMetrics& m) {
  write_row(os, m, m.txns_per_sec, m.ops_per_sec, m.retries, m.deferred,
            m.gc_reclaimed);
}

void write_run_csv(std::ostream& os, const RunMetrics& m, bool header) {
  if (header) os << kCsvHeader << '\n';
  if (!m.failed)
    for (std::size_t i = 0; i < m.per_second.size(); ++i)
      write_row(os, m, double(m.per_second[i]), double(m.per_second_ops[i]),
                m.retries, m.deferred, m.gc_reclaimed);
  write_summary_row(os, m);
}

}  // namespace bohm
