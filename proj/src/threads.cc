#include "bohm/threads.h"

#include <cstdlib>
#include <cstring>
#include <thread>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace bohm {

bool pinning_disabled() {
  const char* v = std::getenv("BOHM_THREADS_NO_PIN");
  return v && std::strcmp(v, "1") == 0;
}

std::size_t hardware_threads() {
  auto n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

bool pin_current_thread(std::size_t slot) {
  if (pinning_disabled()) return false;
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<int>(slot % hardware_threads()), &set);
  return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
  (void)slot;
  return false;
#endif
}

}  // namespace bohm
