#include <cstdlib>
#include <string>

#include "idw/kernels.hpp"

namespace idw::kernels {

std::string_view to_string(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view text) {
  if (text == "scalar") return Isa::kScalar;
  if (text == "avx2") return Isa::kAvx2;
  if (text == "auto") return detect_isa();
  throw usage_error("unknown SIMD variant '" + std::string(text) + "'");
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(IDW_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() noexcept { return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

Isa default_isa() {
  if (const char* env = std::getenv("IDW_SIMD"); env != nullptr && *env != '\0') {
    const Isa isa = parse_isa(env);
    if (!isa_available(isa)) throw usage_error("IDW_SIMD requests an ISA this CPU lacks");
    return isa;
  }
  return detect_isa();
}

template <class T>
const KernelTable<T>& kernel_table(Isa isa) {
  static const KernelTable<T> scalar_table{Isa::kScalar, &scalar::accumulate_queries<T>,
                                           &scalar::accumulate_workers<T>};
  if (isa == Isa::kScalar) return scalar_table;
#if defined(IDW_HAVE_AVX2)
  static const KernelTable<T> avx2_table{Isa::kAvx2, &avx2::accumulate_queries<T>,
                                         &avx2::accumulate_workers<T>};
  if (isa_available(Isa::kAvx2)) return avx2_table;
#endif
  throw usage_error("SIMD variant '" + std::string(to_string(isa)) + "' is not available");
}

template const KernelTable<float>& kernel_table<float>(Isa);
template const KernelTable<double>& kernel_table<double>(Isa);

}  // namespace idw::kernels
