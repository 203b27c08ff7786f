#include <atomic>
#include <cstdlib>
#include <cstring>

#include "lpe/errors.hpp"
#include "lpe/simd/kernels.hpp"

namespace lpe::simd {

#ifndef LPE_HAVE_AVX2_TU
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const KernelTable* choose() {
  const char* env = std::getenv("LPE_SIMD");
  const bool force_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
  if (!force_scalar && cpu_has_avx2() && avx2_kernels() != nullptr) {
    g_backend = Backend::avx2;
    return avx2_kernels();
  }
  g_backend = Backend::scalar;
  return &scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = choose();
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

Backend active_backend() {
  kernels();
  return g_backend.load();
}

void set_backend(Backend b) {
  if (b == Backend::avx2) {
    if (!cpu_has_avx2() || avx2_kernels() == nullptr)
      throw ConfigurationError("AVX2 kernels requested but not available on this CPU/build");
    g_table = avx2_kernels();
  } else {
    g_table = &scalar_kernels();
  }
  g_backend = b;
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace lpe::simd
