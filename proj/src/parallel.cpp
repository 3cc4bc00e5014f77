#include "affdim/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace affdim {

namespace {

unsigned initial_threads() {
  const char* env = std::getenv("AFFDIM_THREADS");
  if (!env || !*env) return 1;
  try {
    const long v = std::stol(env);
    return v >= 1 ? static_cast<unsigned>(v) : 1u;
  } catch (...) {
    return 1;
  }
}

std::atomic<unsigned>& cap() {
  static std::atomic<unsigned> value{initial_threads()};
  return value;
}

}  // namespace

unsigned thread_count() { return cap().load(); }

void set_thread_count(unsigned n) { cap().store(n == 0 ? 1u : n); }

}  // namespace affdim
