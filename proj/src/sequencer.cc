#include "bohm/sequencer.h"

#include <algorithm>

namespace bohm {

void Sequencer::note_mutation() {
  auto self = std::this_thread::get_id();
  if (owner_ == std::thread::id{})
    owner_ = self;
  else if (owner_ != self)
    ++cross_thread_;
}

void Sequencer::enqueue(std::unique_ptr<Transaction> txn) {
  if (draining_) throw RejectedAfterShutdown();
  note_mutation();
  pending_.push_back(std::move(txn));
}

std::unique_ptr<Batch> Sequencer::seal_batch(std::size_t batch_size) {
  if (pending_.empty() && !draining_) throw EmptyLog();
  note_mutation();
  auto batch = std::make_unique<Batch>();
  batch->id = next_batch_id_++;
  batch->base_ts = next_ts_;
  std::size_t n = std::min(batch_size, pending_.size());
  batch->txns.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto txn = std::move(pending_.front());
    pending_.pop_front();
    txn->ts = next_ts_++;
    batch->txns.push_back(std::move(txn));
  }
  return batch;
}

}  // namespace bohm
