#pragma once

#include <atomic>
#include <cstdint>
#include <thread>

namespace bohm {

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#elif defined(__aarch64__)
  asm volatile("yield");
#endif
}

// Spin briefly, then yield. Used where the wait is expected to be short
// (placeholder publication, a peer finishing a transaction).
class Backoff {
 public:
  void pause() {
    if (spins_ < kSpinLimit) {
      for (int i = 0; i < (1 << spins_); ++i) cpu_relax();
      ++spins_;
    } else {
      std::this_thread::yield();
    }
  }
  void reset() { spins_ = 0; }

 private:
  static constexpr int kSpinLimit = 6;
  int spins_ = 0;
};

// Generation counter for blocking waits on conditions that change a few
// times per batch. Waiters sleep in the kernel (atomic wait) rather than
// burning a core.
class Doorbell {
 public:
  void ring() {
    gen_.fetch_add(1, std::memory_order_acq_rel);
    gen_.notify_all();
  }

  template <typename Pred>
  void wait_until(Pred&& ready) {
    for (int i = 0; i < 64; ++i) {
      if (ready()) return;
      cpu_relax();
    }
    for (;;) {
      auto g = gen_.load(std::memory_order_acquire);
      if (ready()) return;
      gen_.wait(g, std::memory_order_acquire);
    }
  }

 private:
  std::atomic<std::uint32_t> gen_{0};
};

class SpinLatch {
 public:
  void lock() {
    Backoff b;
    while (flag_.exchange(true, std::memory_order_acquire)) {
      while (flag_.load(std::memory_order_relaxed)) b.pause();
    }
  }
  void unlock() { flag_.store(false, std::memory_order_release); }

 private:
  std::atomic<bool> flag_{false};
};

}  // namespace bohm
