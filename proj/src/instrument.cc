#include "bohm/instrument.h"

namespace bohm::instrument {

namespace {
Counters g_counters;
std::atomic<bool> g_counting{false};
thread_local std::uint32_t tl_partition = kNoPartition;
thread_local int tl_read_depth = 0;
thread_local int tl_annotate_depth = 0;
}  // namespace

Counters& counters() { return g_counters; }

void reset() {
  g_counters.read_path_shared_writes = 0;
  g_counters.annotate_shared_writes = 0;
  g_counters.single_writer_violations = 0;
  g_counters.poisoned_accesses = 0;
  g_counters.resolve_read_calls = 0;
}

void set_counting(bool on) { g_counting.store(on, std::memory_order_relaxed); }

std::uint32_t current_partition() { return tl_partition; }
void set_current_partition(std::uint32_t p) { tl_partition = p; }

void note_shared_write() {
  if (tl_read_depth > 0)
    g_counters.read_path_shared_writes.fetch_add(1, std::memory_order_relaxed);
  if (tl_annotate_depth > 0)
    g_counters.annotate_shared_writes.fetch_add(1, std::memory_order_relaxed);
}

void note_metadata_write(std::uint32_t owner) {
  note_shared_write();
  if (owner != tl_partition)
    g_counters.single_writer_violations.fetch_add(1, std::memory_order_relaxed);
}

ReadScope::ReadScope() {
  ++tl_read_depth;
  if (g_counting.load(std::memory_order_relaxed))
    g_counters.resolve_read_calls.fetch_add(1, std::memory_order_relaxed);
}
ReadScope::~ReadScope() { --tl_read_depth; }

AnnotateScope::AnnotateScope() { ++tl_annotate_depth; }
AnnotateScope::~AnnotateScope() { --tl_annotate_depth; }

}  // namespace bohm::instrument
