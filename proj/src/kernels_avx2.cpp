// AVX2 variants of the accumulation kernels. The AVX2 target is switched on
// after the includes rather than with -mavx2 for the whole file, so inline
// helpers pulled in from headers stay baseline x86-64 and the binary still
// runs on CPUs without AVX2 (dispatch checks before calling in here).

#include "idw/kernels.hpp"

#if defined(IDW_HAVE_AVX2)

#include <immintrin.h>

#include <array>

#if defined(__clang__)
#pragma clang attribute push(__attribute__((target("avx2"))), apply_to = function)
#else
#pragma GCC push_options
#pragma GCC target("avx2")
#endif

namespace idw::kernels::avx2 {
namespace {

template <class T>
struct Simd;

template <>
struct Simd<double> {
  using V = __m256d;
  static constexpr std::size_t kLanes = 4;

  static V set1(double v) { return _mm256_set1_pd(v); }
  static V load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, V v) { _mm256_storeu_pd(p, v); }
  static V gather(const double* p, std::size_t stride) {
    if (stride == 1) return load(p);
    const int s = static_cast<int>(stride);
    const __m128i idx = _mm_setr_epi32(0, s, 2 * s, 3 * s);
    return _mm256_i32gather_pd(p, idx, 8);
  }
  static V add(V a, V b) { return _mm256_add_pd(a, b); }
  static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
  static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
  static V div(V a, V b) { return _mm256_div_pd(a, b); }
  static V le(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_LE_OQ); }
  static int movemask(V m) { return _mm256_movemask_pd(m); }
  static V andnot(V mask, V v) { return _mm256_andnot_pd(mask, v); }
};

template <>
struct Simd<float> {
  using V = __m256;
  static constexpr std::size_t kLanes = 8;

  static V set1(float v) { return _mm256_set1_ps(v); }
  static V load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, V v) { _mm256_storeu_ps(p, v); }
  static V gather(const float* p, std::size_t stride) {
    if (stride == 1) return load(p);
    const int s = static_cast<int>(stride);
    const __m256i idx = _mm256_setr_epi32(0, s, 2 * s, 3 * s, 4 * s, 5 * s, 6 * s, 7 * s);
    return _mm256_i32gather_ps(p, idx, 4);
  }
  static V add(V a, V b) { return _mm256_add_ps(a, b); }
  static V sub(V a, V b) { return _mm256_sub_ps(a, b); }
  static V mul(V a, V b) { return _mm256_mul_ps(a, b); }
  static V div(V a, V b) { return _mm256_div_ps(a, b); }
  static V le(V a, V b) { return _mm256_cmp_ps(a, b, _CMP_LE_OQ); }
  static int movemask(V m) { return _mm256_movemask_ps(m); }
  static V andnot(V mask, V v) { return _mm256_andnot_ps(mask, v); }
};

// Weights for one vector of squared distances; coincident lanes get 0.
template <class T>
inline typename Simd<T>::V weights(typename Simd<T>::V d2, typename Simd<T>::V coincident,
                                   const WeightConfig<T>& cfg) {
  using S = Simd<T>;
  if (cfg.p == 2.0) return S::andnot(coincident, S::div(S::set1(T(1)), d2));
  alignas(32) std::array<T, S::kLanes> lanes;
  S::store(lanes.data(), d2);
  const T p = static_cast<T>(cfg.p);
  for (auto& v : lanes) v = v <= cfg.zero_eps ? T(0) : weight_general<T>(v, p);
  return S::load(lanes.data());
}

// Vector step against one broadcast sample for L consecutive queries.
template <class T>
struct QueryLanes {
  typename Simd<T>::V qx, qy, sum_w, sum_wz;
};

template <class T>
inline int step_queries(QueryLanes<T>& lanes, typename Simd<T>::V sx, typename Simd<T>::V sy,
                        typename Simd<T>::V sz, typename Simd<T>::V eps,
                        const WeightConfig<T>& cfg) {
  using S = Simd<T>;
  const auto ex = S::sub(lanes.qx, sx);
  const auto ey = S::sub(lanes.qy, sy);
  const auto d2 = S::add(S::mul(ex, ex), S::mul(ey, ey));
  const auto coincident = S::le(d2, eps);
  const auto w = weights<T>(d2, coincident, cfg);
  lanes.sum_w = S::add(lanes.sum_w, w);
  lanes.sum_wz = S::add(lanes.sum_wz, S::mul(w, sz));
  return S::movemask(coincident);
}

template <class T>
inline void record_hits(int mask, std::uint64_t* hit, T* hit_z, std::uint64_t index, T z) {
  for (std::size_t l = 0; mask != 0; ++l, mask >>= 1) {
    if ((mask & 1) != 0 && hit[l] == kNoHit) {
      hit[l] = index;
      hit_z[l] = z;
    }
  }
}

}  // namespace

template <class T>
void accumulate_queries(QueryBlock<T> queries, SampleViews<T> samples, std::size_t begin,
                        std::size_t end, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc) {
  using S = Simd<T>;
  constexpr std::size_t L = S::kLanes;
  const auto eps = S::set1(cfg.zero_eps);
  std::size_t q = 0;

  // Two query vectors per pass hide the add latency of the running sums.
  for (; q + 2 * L <= queries.count; q += 2 * L) {
    QueryLanes<T> a{S::load(queries.x + q), S::load(queries.y + q), S::load(acc.sum_w + q),
                    S::load(acc.sum_wz + q)};
    QueryLanes<T> b{S::load(queries.x + q + L), S::load(queries.y + q + L),
                    S::load(acc.sum_w + q + L), S::load(acc.sum_wz + q + L)};
    for (std::size_t i = begin; i < end; ++i) {
      const T zi = samples.z[i];
      const auto sx = S::set1(samples.x[i]);
      const auto sy = S::set1(samples.y[i]);
      const auto sz = S::set1(zi);
      const int ma = step_queries<T>(a, sx, sy, sz, eps, cfg);
      const int mb = step_queries<T>(b, sx, sy, sz, eps, cfg);
      if ((ma | mb) != 0) [[unlikely]] {
        record_hits<T>(ma, acc.hit + q, acc.hit_z + q, index_base + i, zi);
        record_hits<T>(mb, acc.hit + q + L, acc.hit_z + q + L, index_base + i, zi);
      }
    }
    S::store(acc.sum_w + q, a.sum_w);
    S::store(acc.sum_wz + q, a.sum_wz);
    S::store(acc.sum_w + q + L, b.sum_w);
    S::store(acc.sum_wz + q + L, b.sum_wz);
  }

  for (; q + L <= queries.count; q += L) {
    QueryLanes<T> a{S::load(queries.x + q), S::load(queries.y + q), S::load(acc.sum_w + q),
                    S::load(acc.sum_wz + q)};
    for (std::size_t i = begin; i < end; ++i) {
      const T zi = samples.z[i];
      const int ma = step_queries<T>(a, S::set1(samples.x[i]), S::set1(samples.y[i]), S::set1(zi),
                                     eps, cfg);
      if (ma != 0) [[unlikely]] {
        record_hits<T>(ma, acc.hit + q, acc.hit_z + q, index_base + i, zi);
      }
    }
    S::store(acc.sum_w + q, a.sum_w);
    S::store(acc.sum_wz + q, a.sum_wz);
  }

  if (q < queries.count) {
    QueryBlock<T> rest{queries.x + q, queries.y + q, queries.count - q};
    LaneAccumulators<T> rest_acc{acc.sum_w + q, acc.sum_wz + q, acc.hit + q, acc.hit_z + q};
    scalar::accumulate_queries<T>(rest, samples, begin, end, index_base, cfg, rest_acc);
  }
}

template <class T>
void accumulate_workers(T qx, T qy, SampleViews<T> samples, std::size_t begin, std::size_t end,
                        std::size_t group_size, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc, WorkerTrace trace) {
  using S = Simd<T>;
  constexpr std::size_t L = S::kLanes;
  const std::size_t len = end > begin ? end - begin : 0;
  const std::size_t rounds = (len + group_size - 1) / group_size;
  const auto eps = S::set1(cfg.zero_eps);
  const auto vqx = S::set1(qx);
  const auto vqy = S::set1(qy);

  std::size_t t0 = 0;
  for (; t0 + L <= group_size; t0 += L) {
    QueryLanes<T> lanes{vqx, vqy, S::load(acc.sum_w + t0), S::load(acc.sum_wz + t0)};
    std::size_t k = 0;
    for (; k < rounds; ++k) {
      const std::size_t base = begin + k * group_size + t0;
      if (base + L > end) break;
      const auto sx = S::gather(&samples.x.base[base * samples.x.stride], samples.x.stride);
      const auto sy = S::gather(&samples.y.base[base * samples.y.stride], samples.y.stride);
      const auto sz = S::gather(&samples.z.base[base * samples.z.stride], samples.z.stride);
      const int mask = step_queries<T>(lanes, sx, sy, sz, eps, cfg);
      if (mask != 0) [[unlikely]] {
        for (std::size_t l = 0; l < L; ++l) {
          if (((mask >> l) & 1) != 0 && acc.hit[t0 + l] == kNoHit) {
            acc.hit[t0 + l] = index_base + base + l;
            acc.hit_z[t0 + l] = samples.z[base + l];
          }
        }
      }
    }
    S::store(acc.sum_w + t0, lanes.sum_w);
    S::store(acc.sum_wz + t0, lanes.sum_wz);

    // Partial final round: the lanes still in range take their last sample.
    std::size_t tail_valid = 0;
    if (k < rounds) {
      const std::size_t base = begin + k * group_size + t0;
      tail_valid = base < end ? end - base : 0;
      for (std::size_t l = 0; l < tail_valid; ++l) {
        const std::size_t i = base + l;
        const std::size_t t = t0 + l;
        accumulate_one(qx, qy, samples.x[i], samples.y[i], samples.z[i], index_base + i, cfg,
                       acc.sum_w[t], acc.sum_wz[t], acc.hit[t], acc.hit_z[t]);
      }
    }
    if (trace.iterations != nullptr || trace.points != nullptr) {
      for (std::size_t l = 0; l < L; ++l) {
        const std::uint32_t done = static_cast<std::uint32_t>(k + (l < tail_valid ? 1 : 0));
        if (trace.iterations != nullptr) trace.iterations[t0 + l] += static_cast<std::uint32_t>(rounds);
        if (trace.points != nullptr) trace.points[t0 + l] += done;
      }
    }
  }

  if (t0 < group_size) {
    // Leftover workers when G is not a multiple of the vector width. The
    // scalar loop indexes from worker 0, so shift the range by t0.
    const std::size_t rest = group_size - t0;
    for (std::size_t t = 0; t < rest; ++t) {
      std::uint32_t done = 0;
      for (std::size_t k = 0; k < rounds; ++k) {
        const std::size_t i = begin + k * group_size + t0 + t;
        if (i >= end) break;
        accumulate_one(qx, qy, samples.x[i], samples.y[i], samples.z[i], index_base + i, cfg,
                       acc.sum_w[t0 + t], acc.sum_wz[t0 + t], acc.hit[t0 + t], acc.hit_z[t0 + t]);
        ++done;
      }
      if (trace.iterations != nullptr) trace.iterations[t0 + t] += static_cast<std::uint32_t>(rounds);
      if (trace.points != nullptr) trace.points[t0 + t] += done;
    }
  }
}

template void accumulate_queries<float>(QueryBlock<float>, SampleViews<float>, std::size_t,
                                        std::size_t, std::uint64_t, WeightConfig<float>,
                                        LaneAccumulators<float>);
template void accumulate_queries<double>(QueryBlock<double>, SampleViews<double>, std::size_t,
                                         std::size_t, std::uint64_t, WeightConfig<double>,
                                         LaneAccumulators<double>);
template void accumulate_workers<float>(float, float, SampleViews<float>, std::size_t, std::size_t,
                                        std::size_t, std::uint64_t, WeightConfig<float>,
                                        LaneAccumulators<float>, WorkerTrace);
template void accumulate_workers<double>(double, double, SampleViews<double>, std::size_t,
                                         std::size_t, std::size_t, std::uint64_t,
                                         WeightConfig<double>, LaneAccumulators<double>,
                                         WorkerTrace);

}  // namespace idw::kernels::avx2

#if defined(__clang__)
#pragma clang attribute pop
#else
#pragma GCC pop_options
#endif

#endif  // IDW_HAVE_AVX2
