#pragma once
// Inner accumulation loops shared by the parallel strategies.
//
// Two loop shapes cover every strategy:
//
//  * accumulate_queries: lanes are queries. Each query scans the samples
//    [begin, end) in index order. Used by the naive and tiled strategies.
//  * accumulate_workers: lanes are workers of one group of size G. Worker t
//    accumulates samples begin + t, begin + t + G, ... Used by the nested
//    strategies.
//
// Every lane performs exactly the scalar sequence of operations
// (sub, sub, mul, mul, add, weight, mul, add, add) in the same order, so the
// SIMD variants are bit-identical to the scalar ones. The build disables
// floating-point contraction to keep it that way.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "idw/core.hpp"
#include "idw/layout_store.hpp"

namespace idw::kernels {

enum class Isa : std::uint8_t { kScalar = 0, kAvx2 = 1 };

std::string_view to_string(Isa isa);
Isa parse_isa(std::string_view text);  // "scalar", "avx2", "auto"
bool isa_available(Isa isa) noexcept;
// Best ISA supported by the running CPU.
Isa detect_isa() noexcept;
// detect_isa() unless the IDW_SIMD environment variable pins a choice.
Isa default_isa();

// Per-lane running sums. hit is kNoHit until a coincident sample is seen;
// hit_z holds that sample's value.
template <class T>
struct LaneAccumulators {
  T* sum_w = nullptr;
  T* sum_wz = nullptr;
  std::uint64_t* hit = nullptr;
  T* hit_z = nullptr;
};

template <class T>
struct SampleViews {
  StridedView<T> x;
  StridedView<T> y;
  StridedView<T> z;
};

template <class T>
struct QueryBlock {
  const T* x = nullptr;
  const T* y = nullptr;
  std::size_t count = 0;
};

template <class T>
struct WeightConfig {
  T zero_eps = 0;
  double p = 2.0;
};

// Optional per-worker instrumentation for accumulate_workers.
struct WorkerTrace {
  std::uint32_t* iterations = nullptr;  // strided loop trips, bounds-checked no-ops included
  std::uint32_t* points = nullptr;      // samples actually accumulated
};

template <class T>
using AccumulateQueriesFn = void (*)(QueryBlock<T> queries, SampleViews<T> samples,
                                     std::size_t begin, std::size_t end, std::uint64_t index_base,
                                     WeightConfig<T> cfg, LaneAccumulators<T> acc);

template <class T>
using AccumulateWorkersFn = void (*)(T qx, T qy, SampleViews<T> samples, std::size_t begin,
                                     std::size_t end, std::size_t group_size,
                                     std::uint64_t index_base, WeightConfig<T> cfg,
                                     LaneAccumulators<T> acc, WorkerTrace trace);

template <class T>
struct KernelTable {
  Isa isa = Isa::kScalar;
  AccumulateQueriesFn<T> accumulate_queries = nullptr;
  AccumulateWorkersFn<T> accumulate_workers = nullptr;
};

// Throws if the ISA is not available on this CPU or not compiled in.
template <class T>
const KernelTable<T>& kernel_table(Isa isa);

namespace scalar {
template <class T>
void accumulate_queries(QueryBlock<T> queries, SampleViews<T> samples, std::size_t begin,
                        std::size_t end, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc);
template <class T>
void accumulate_workers(T qx, T qy, SampleViews<T> samples, std::size_t begin, std::size_t end,
                        std::size_t group_size, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc, WorkerTrace trace);
}  // namespace scalar

#if defined(IDW_HAVE_AVX2)
namespace avx2 {
template <class T>
void accumulate_queries(QueryBlock<T> queries, SampleViews<T> samples, std::size_t begin,
                        std::size_t end, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc);
template <class T>
void accumulate_workers(T qx, T qy, SampleViews<T> samples, std::size_t begin, std::size_t end,
                        std::size_t group_size, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc, WorkerTrace trace);
}  // namespace avx2
#endif

// Single-sample step shared by the scalar loops and the SIMD tails.
template <class T>
inline void accumulate_one(T qx, T qy, T sx, T sy, T sz, std::uint64_t index,
                           const WeightConfig<T>& cfg, T& sum_w, T& sum_wz, std::uint64_t& hit,
                           T& hit_z) noexcept {
  const T d2 = squared_distance(qx, qy, sx, sy);
  if (d2 <= cfg.zero_eps) {
    if (hit == kNoHit) {
      hit = index;
      hit_z = sz;
    }
    return;
  }
  const T w = weight<T>(d2, cfg.p);
  sum_w += w;
  sum_wz += w * sz;
}

}  // namespace idw::kernels
