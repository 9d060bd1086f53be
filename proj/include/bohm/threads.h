#pragma once

#include <cstddef>

namespace bohm {

// True when BOHM_THREADS_NO_PIN=1 is set in the environment.
bool pinning_disabled();

// Best-effort: binds the calling thread to core (slot % hardware threads).
// Returns false when the platform refuses or pinning is disabled.
bool pin_current_thread(std::size_t slot);

std::size_t hardware_threads();

}  // namespace bohm
