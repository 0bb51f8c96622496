#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "kuramoto/error.hpp"

namespace kuramoto::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(KURAMOTO_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(KURAMOTO_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* kernels_for(Isa isa) noexcept {
  if (!cpu_supports(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar: return &scalar_kernels();
#if defined(KURAMOTO_HAVE_AVX2)
    case Isa::avx2: return &avx2_kernels();
#endif
#if defined(KURAMOTO_HAVE_NEON)
    case Isa::neon: return &neon_kernels();
#endif
    default: return nullptr;
  }
}

namespace {

const KernelTable& select_kernels() {
  if (const char* env = std::getenv("KURAMOTO_SIMD"); env != nullptr && *env != '\0') {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want != isa_name(isa)) continue;
      if (const KernelTable* t = kernels_for(isa)) return *t;
      throw ConfigError("KURAMOTO_SIMD=" + want + " is not available on this machine");
    }
    throw ConfigError("KURAMOTO_SIMD must be scalar, avx2 or neon, got '" + want + "'");
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (const KernelTable* t = kernels_for(isa)) return *t;
  }
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select_kernels();
  return table;
}

}  // namespace kuramoto::simd
