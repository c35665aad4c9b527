#include "sofic/parallel.hpp"

namespace sofic {

namespace {
std::atomic<unsigned> g_max_threads{std::max(1u, std::thread::hardware_concurrency())};
}

void set_max_threads(unsigned n) {
  g_max_threads = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}

unsigned max_threads() { return g_max_threads; }

}  // namespace sofic
