#include "bsderep/parallel.hpp"

#include <atomic>

namespace bsderep {

namespace {
std::atomic<unsigned> g_jobs{0};
}

unsigned default_jobs() {
    const unsigned j = g_jobs.load();
    if (j) return j;
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_jobs(unsigned jobs) { g_jobs.store(jobs); }

}  // namespace bsderep
