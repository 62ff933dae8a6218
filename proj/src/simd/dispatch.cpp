#include <atomic>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

#include "latticeme/simd.hpp"

namespace latticeme::simd {

extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif

namespace {

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend pick_default() {
  if (const char* env = std::getenv("LATTICEME_SIMD")) {
    const std::string v(env);
    if (v != "auto" && !v.empty()) {
      const Backend b = parse_backend(v);
      if (!backend_supported(b))
        throw std::runtime_error("LATTICEME_SIMD requests unavailable backend: " + v);
      return b;
    }
  }
  if (backend_supported(Backend::avx2)) return Backend::avx2;
  if (backend_supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::once_flag g_once;
std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Backend> g_active_backend{Backend::scalar};

void init_active() {
  const Backend b = pick_default();
  g_active_backend.store(b, std::memory_order_relaxed);
  g_active.store(kernel_table(b), std::memory_order_release);
}

}  // namespace

const KernelTable* kernel_table(Backend b) {
  if (!backend_supported(b)) return nullptr;
  switch (b) {
    case Backend::scalar:
      return &kScalarTable;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& kernels() {
  std::call_once(g_once, init_active);
  return *g_active.load(std::memory_order_acquire);
}

Backend active_backend() {
  std::call_once(g_once, init_active);
  return g_active_backend.load(std::memory_order_relaxed);
}

void force_backend(Backend b) {
  const KernelTable* t = kernel_table(b);
  if (!t)
    throw std::runtime_error(std::string("SIMD backend unavailable: ") +
                             backend_name(b));
  std::call_once(g_once, init_active);
  g_active_backend.store(b, std::memory_order_relaxed);
  g_active.store(t, std::memory_order_release);
}

Backend parse_backend(const std::string& name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  if (name == "neon") return Backend::neon;
  throw std::runtime_error("unknown SIMD backend: " + name);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
    if (backend_supported(b)) out.push_back(b);
  return out;
}

}  // namespace latticeme::simd
