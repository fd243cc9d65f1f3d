#include "i3net/tensor.hpp"

#include <atomic>
#include <cstdlib>

namespace i3net {

namespace {
std::atomic<bool> g_finite_checks{[] {
    const char* env = std::getenv("I3NET_DEBUG_FINITE");
    return env != nullptr && env[0] == '1';
}()};
}

bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }
void set_finite_checks(bool on) { g_finite_checks.store(on, std::memory_order_relaxed); }

} // namespace i3net
