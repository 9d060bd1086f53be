#pragma once

#include <atomic>
#include <cstdint>

// Counters used by tests and the acceptance suite to check the engine's
// sharing discipline: reads never write shared state, version metadata has
// a single writer, reclaimed versions are never touched.
namespace bohm::instrument {

inline constexpr std::uint32_t kNoPartition = 0xffffffffu;

struct Counters {
  std::atomic<std::uint64_t> read_path_shared_writes{0};
  std::atomic<std::uint64_t> annotate_shared_writes{0};
  std::atomic<std::uint64_t> single_writer_violations{0};
  std::atomic<std::uint64_t> poisoned_accesses{0};
  std::atomic<std::uint64_t> resolve_read_calls{0};
};

Counters& counters();
void reset();

// Call counting (resolve_read_calls) is off unless enabled; it is the only
// counter that would otherwise be bumped on the hot path.
void set_counting(bool on);

// Partition owned by the calling thread, or kNoPartition.
std::uint32_t current_partition();
void set_current_partition(std::uint32_t p);

// Called by every mutator of shared engine state. Attributes the write to
// any enclosing ReadScope/AnnotateScope.
void note_shared_write();

// Called by mutators of version/index metadata owned by `owner`.
void note_metadata_write(std::uint32_t owner);

class ReadScope {
 public:
  ReadScope();
  ~ReadScope();
  ReadScope(const ReadScope&) = delete;
  ReadScope& operator=(const ReadScope&) = delete;
};

class AnnotateScope {
 public:
  AnnotateScope();
  ~AnnotateScope();
  AnnotateScope(const AnnotateScope&) = delete;
  AnnotateScope& operator=(const AnnotateScope&) = delete;
};

}  // namespace bohm::instrument
