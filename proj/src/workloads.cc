#include "bohm/workloads.h"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "bohm/sync.h"

namespace bohm {

namespace {

constexpr std::string_view kNames[] = {"micro10rmw", "ycsb10rmw", "ycsb2rmw8r",
                                       "readonlymix", "smallbank"};

// Copy the read image forward and bump its first 64-bit word.
Outcome rmw_logic(std::span<const ReadValue> reads, std::span<WriteValue> writes) {
  for (std::size_t j = 0; j < writes.size(); ++j) {
    auto out = writes[j].bytes;
    std::fill(out.begin(), out.end(), std::byte{0});
    if (reads[j].found)
      std::copy_n(reads[j].bytes.begin(),
                  std::min(out.size(), reads[j].bytes.size()), out.begin());
    store_i64(out, load_i64(out) + 1);
  }
  return Outcome::kCommit;
}

std::int64_t balance(const ReadValue& r) { return r.found ? load_i64(r.bytes) : 0; }

}  // namespace

std::string_view to_string(WorkloadKind k) {
  return kNames[static_cast<std::size_t>(k)];
}

WorkloadKind parse_workload_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kNames); ++i)
    if (kNames[i] == name) return static_cast<WorkloadKind>(i);
  throw ConfigError("unknown workload '" + std::string(name) + "'");
}

void WorkloadSpec::validate() const {
  if (!(theta >= 0 && theta < 1)) throw ConfigError("theta must be in [0, 1)");
  switch (kind) {
    case WorkloadKind::kSmallBank: {
      if (customers < 1) throw ConfigError("smallbank needs at least one customer");
      double total = 0;
      for (double w : mix) {
        if (w < 0) throw ConfigError("smallbank mix weights must be >= 0");
        total += w;
      }
      if (total <= 0) throw ConfigError("smallbank mix has no positive weight");
      if (customers < 2 && mix[static_cast<std::size_t>(SmallBankTxn::kAmalgamate)] > 0)
        throw ConfigError("amalgamate needs at least two customers");
      break;
    }
    case WorkloadKind::kReadOnlyMix:
      if (!(readonly_fraction >= 0 && readonly_fraction <= 1))
        throw ConfigError("readonly_fraction must be in [0, 1]");
      if (scan_size == 0 || scan_size > db_size)
        throw ConfigError("scan_size must be in [1, db_size]");
      [[fallthrough]];
    default:
      if (db_size < 10) throw ConfigError("db_size must be >= 10 for 10-key transactions");
      if (kind != WorkloadKind::kMicro10RMW && record_size < 8)
        throw ConfigError("record_size must be >= 8");
  }
}

std::uint32_t table_record_size(const WorkloadSpec& spec, TableId t) {
  if (spec.kind == WorkloadKind::kSmallBank) return 8;
  (void)t;
  return spec.kind == WorkloadKind::kMicro10RMW ? 8 : spec.record_size;
}

DbState load_workload(Engine& engine, const WorkloadSpec& spec) {
  spec.validate();
  DbState state;
  // All tables exist before the first load so engines can size their
  // indexes for the whole database.
  std::vector<std::pair<TableId, std::uint64_t>> tables;
  if (spec.kind == WorkloadKind::kSmallBank)
    tables = {{kCustomerTable, spec.customers},
              {kSavingsTable, spec.customers},
              {kCheckingTable, spec.customers}};
  else
    tables = {{kYcsbTable, spec.db_size}};
  for (auto [t, n] : tables) engine.create_table(t, table_record_size(spec, t), n);

  for (auto [t, n] : tables) {
    const std::uint32_t size = table_record_size(spec, t);
    std::vector<Record> records;
    records.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      Payload p(size, std::byte{0});
      // Customer rows map the customer's name (its row key) to its id;
      // YCSB rows start with their own key.
      bool bank = t == kSavingsTable || t == kCheckingTable;
      store_i64(p, bank ? spec.initial_balance : std::int64_t(k));
      state.emplace(RecordKey{t, k}, p);
      records.emplace_back(k, std::move(p));
    }
    engine.bulk_load(t, records);
  }
  return state;
}

void spin_for_us(std::uint32_t us) {
  if (us == 0) return;
  auto until = std::chrono::steady_clock::now() + std::chrono::microseconds(us);
  while (std::chrono::steady_clock::now() < until) cpu_relax();
}

TxnGenerator::TxnGenerator(const WorkloadSpec& spec) : spec_(spec), rng_(spec.seed) {
  spec_.validate();
  if (spec_.kind != WorkloadKind::kSmallBank)
    zipf_.emplace(spec_.db_size, spec_.theta);
  double total = std::accumulate(spec_.mix.begin(), spec_.mix.end(), 0.0);
  double acc = 0;
  for (std::size_t i = 0; i < mix_cdf_.size(); ++i) {
    acc += spec_.mix[i] / total;
    mix_cdf_[i] = acc;
  }
}

std::vector<std::uint64_t> TxnGenerator::distinct_zipf(std::size_t k) {
  std::vector<std::uint64_t> keys;
  keys.reserve(k);
  while (keys.size() < k) {
    std::uint64_t key = zipf_->next(rng_);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  return keys;
}

// Floyd's sampling: k distinct values from [0, n) in O(k) draws.
std::vector<std::uint64_t> TxnGenerator::distinct_uniform(std::uint64_t n, std::size_t k) {
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> keys;
  chosen.reserve(k * 2);
  keys.reserve(k);
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t t = uniform_below(rng_, j + 1);
    std::uint64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    keys.push_back(pick);
  }
  return keys;
}

std::unique_ptr<Transaction> TxnGenerator::next() {
  last_ro_ = false;
  switch (spec_.kind) {
    case WorkloadKind::kMicro10RMW:
    case WorkloadKind::kYcsb10RMW:
      return ycsb_rmw(10, 0);
    case WorkloadKind::kYcsb2RMW8R:
      return ycsb_rmw(2, 8);
    case WorkloadKind::kReadOnlyMix:
      if (unit_uniform(rng_) < spec_.readonly_fraction) return read_only_scan();
      return ycsb_rmw(10, 0);
    case WorkloadKind::kSmallBank:
      return smallbank();
  }
  throw std::logic_error("unreachable");
}

std::unique_ptr<Transaction> TxnGenerator::ycsb_rmw(std::size_t rmw, std::size_t reads) {
  auto keys = distinct_zipf(rmw + reads);
  std::vector<RecordKey> rs, ws;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    rs.push_back(RecordKey{kYcsbTable, keys[i]});
    if (i < rmw) ws.push_back(rs.back());
  }
  return std::make_unique<Transaction>(std::move(rs), std::move(ws), rmw_logic);
}

std::unique_ptr<Transaction> TxnGenerator::read_only_scan() {
  last_ro_ = true;
  auto keys = distinct_uniform(spec_.db_size, spec_.scan_size);
  std::vector<RecordKey> rs;
  rs.reserve(keys.size());
  for (auto k : keys) rs.push_back(RecordKey{kYcsbTable, k});
  return std::make_unique<Transaction>(
      std::move(rs), std::vector<RecordKey>{},
      [](std::span<const ReadValue>, std::span<WriteValue>) { return Outcome::kCommit; });
}

std::unique_ptr<Transaction> TxnGenerator::smallbank() {
  const double u = unit_uniform(rng_);
  std::size_t type = 0;
  while (type + 1 < mix_cdf_.size() && u >= mix_cdf_[type]) ++type;
  last_sb_ = static_cast<SmallBankTxn>(type);

  const std::uint64_t a = uniform_below(rng_, spec_.customers);
  const std::int64_t amount = 1 + static_cast<std::int64_t>(uniform_below(rng_, 100));
  const std::uint32_t spin = spec_.spin_us;
  const bool abort_mode = spec_.writecheck_abort;
  const RecordKey sav{kSavingsTable, a}, chk{kCheckingTable, a};

  switch (last_sb_) {
    case SmallBankTxn::kBalance:
      return std::make_unique<Transaction>(
          std::vector<RecordKey>{sav, chk}, std::vector<RecordKey>{},
          [spin](std::span<const ReadValue> r, std::span<WriteValue>) {
            volatile std::int64_t total = balance(r[0]) + balance(r[1]);
            (void)total;
            spin_for_us(spin);
            return Outcome::kCommit;
          });
    case SmallBankTxn::kDeposit:
      return std::make_unique<Transaction>(
          std::vector<RecordKey>{chk}, std::vector<RecordKey>{chk},
          [spin, amount](std::span<const ReadValue> r, std::span<WriteValue> w) {
            store_i64(w[0].bytes, balance(r[0]) + amount);
            spin_for_us(spin);
            return Outcome::kCommit;
          });
    case SmallBankTxn::kTransactSaving: {
      const std::int64_t delta = (rng_() & 1) ? amount : -amount;
      return std::make_unique<Transaction>(
          std::vector<RecordKey>{sav}, std::vector<RecordKey>{sav},
          [spin, delta, abort_mode](std::span<const ReadValue> r, std::span<WriteValue> w) {
            spin_for_us(spin);
            const std::int64_t next = balance(r[0]) + delta;
            if (abort_mode && next < 0) return Outcome::kAbort;
            store_i64(w[0].bytes, next);
            return Outcome::kCommit;
          });
    }
    case SmallBankTxn::kAmalgamate: {
      std::uint64_t b = uniform_below(rng_, spec_.customers - 1);
      if (b >= a) ++b;
      const RecordKey chk_b{kCheckingTable, b};
      return std::make_unique<Transaction>(
          std::vector<RecordKey>{sav, chk, chk_b}, std::vector<RecordKey>{sav, chk, chk_b},
          [spin](std::span<const ReadValue> r, std::span<WriteValue> w) {
            const std::int64_t total = balance(r[0]) + balance(r[1]);
            store_i64(w[0].bytes, 0);
            store_i64(w[1].bytes, 0);
            store_i64(w[2].bytes, balance(r[2]) + total);
            spin_for_us(spin);
            return Outcome::kCommit;
          });
    }
    case SmallBankTxn::kWriteCheck:
      return std::make_unique<Transaction>(
          std::vector<RecordKey>{sav, chk}, std::vector<RecordKey>{chk},
          [spin, amount, abort_mode](std::span<const ReadValue> r, std::span<WriteValue> w) {
            spin_for_us(spin);
            const std::int64_t funds = balance(r[0]) + balance(r[1]);
            std::int64_t charge = amount;
            if (funds < amount) {
              if (abort_mode) return Outcome::kAbort;
              charge += 1;
            }
            store_i64(w[0].bytes, balance(r[1]) - charge);
            return Outcome::kCommit;
          });
  }
  throw std::logic_error("unreachable");
}

}  // namespace bohm
