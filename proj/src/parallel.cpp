#include "twinbeam/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace twinbeam {

namespace {
std::atomic<unsigned> g_override{0};

unsigned default_threads() {
  if (const char* env = std::getenv("TWINBEAM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}
}  // namespace

unsigned max_threads() {
  const unsigned v = g_override.load();
  return v != 0 ? v : default_threads();
}

void set_max_threads(unsigned n) { g_override.store(n); }

}  // namespace twinbeam
