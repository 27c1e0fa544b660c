#include "lcqp/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace lcqp::kernels {

#if defined(__x86_64__) || defined(_M_X64)
namespace detail {
const Ops* avx2_table();  // defined in the -mavx2 translation unit
}
#endif

const Ops* avx2_backend() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return detail::avx2_table();
  }
#endif
  return nullptr;
}

namespace {

const Ops* resolve(const char* name) {
  if (name == nullptr || std::strcmp(name, "auto") == 0) {
    if (const Ops* v = avx2_backend()) return v;
    return &scalar_backend();
  }
  if (std::strcmp(name, "scalar") == 0) return &scalar_backend();
  if (std::strcmp(name, "avx2") == 0) return avx2_backend();
  return nullptr;
}

std::atomic<const Ops*>& selection() {
  static std::atomic<const Ops*> current{resolve(std::getenv("LCQP_KERNELS"))};
  // Unknown env values fall back to auto-detection.
  if (current.load(std::memory_order_relaxed) == nullptr) {
    current.store(resolve("auto"), std::memory_order_relaxed);
  }
  return current;
}

}  // namespace

const Ops& active() { return *selection().load(std::memory_order_relaxed); }

bool select_backend(const char* name) {
  const Ops* v = resolve(name);
  if (v == nullptr) return false;
  selection().store(v, std::memory_order_relaxed);
  return true;
}

}  // namespace lcqp::kernels
