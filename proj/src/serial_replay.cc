#include "bohm/serial_replay.h"

#include <algorithm>
#include <sstream>

namespace bohm {

Payload SerialReplay::apply(const Transaction& txn) {
  std::size_t rbytes = 0, wbytes = 0;
  for (const auto& k : txn.read_set) rbytes += record_size_(k.table);
  for (const auto& k : txn.write_set) wbytes += record_size_(k.table);
  buf_.assign(rbytes + wbytes, std::byte{0});

  std::vector<ReadValue> reads(txn.read_set.size());
  std::size_t off = 0;
  for (std::size_t i = 0; i < txn.read_set.size(); ++i) {
    const auto& k = txn.read_set[i];
    std::uint32_t sz = record_size_(k.table);
    auto it = state_.find(k);
    if (it != state_.end()) {
      std::span<std::byte> dst(buf_.data() + off, sz);
      std::copy_n(it->second.begin(), std::min<std::size_t>(sz, it->second.size()),
                  dst.begin());
      reads[i] = ReadValue{dst, true};
    }
    off += sz;
  }
  std::vector<WriteValue> writes(txn.write_set.size());
  for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
    std::uint32_t sz = record_size_(txn.write_set[j].table);
    writes[j] = WriteValue{std::span<std::byte>(buf_.data() + off, sz), false};
    off += sz;
  }

  Outcome out = txn.logic(reads, writes);
  Payload observed;
  for (const auto& r : reads) append_observed(observed, r);
  if (out == Outcome::kCommit) {
    for (std::size_t j = 0; j < txn.write_set.size(); ++j) {
      if (writes[j].tombstone)
        state_.erase(txn.write_set[j]);
      else
        state_[txn.write_set[j]].assign(writes[j].bytes.begin(),
                                        writes[j].bytes.end());
    }
  }
  return observed;
}

std::size_t count_state_diffs(const DbState& a, const DbState& b,
                              std::string* first) {
  std::size_t n = 0;
  auto note = [&](const RecordKey& k, const char* what) {
    if (n++ == 0 && first) {
      std::ostringstream os;
      os << "key (" << k.table << "," << k.key << "): " << what;
      *first = os.str();
    }
  };
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      note(ia->first, "only in first");
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      note(ib->first, "only in second");
      ++ib;
    } else {
      if (ia->second != ib->second) note(ia->first, "bytes differ");
      ++ia;
      ++ib;
    }
  }
  return n;
}

VerifyReport verify_against_replay(const Engine& engine, const DbState& initial) {
  VerifyReport rep;
  SerialReplay replay(initial, [&](TableId t) { return engine.record_size(t); });
  auto order = engine.serial_order();
  rep.txns = order.size();
  for (std::size_t i = 0; i < order.size(); ++i) {
    Payload expect = replay.apply(*order[i]);
    if (expect != order[i]->observed) {
      if (rep.read_mismatches++ == 0) {
        std::ostringstream os;
        os << "reads of txn #" << i << " (ts " << order[i]->ts
           << ") differ from serial replay";
        rep.first_problem = os.str();
      }
    }
  }
  DbState actual = engine.snapshot();
  std::string diff;
  rep.state_diffs = count_state_diffs(actual, replay.state(), &diff);
  if (rep.state_diffs && rep.first_problem.empty()) rep.first_problem = diff;
  rep.engine_digest = digest(actual);
  rep.replay_digest = digest(replay.state());
  return rep;
}

}  // namespace bohm
