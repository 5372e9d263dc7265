#include "idw/kernels.hpp"

namespace idw::kernels::scalar {

template <class T>
void accumulate_queries(QueryBlock<T> queries, SampleViews<T> samples, std::size_t begin,
                        std::size_t end, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc) {
  for (std::size_t q = 0; q < queries.count; ++q) {
    const T qx = queries.x[q];
    const T qy = queries.y[q];
    T sum_w = acc.sum_w[q];
    T sum_wz = acc.sum_wz[q];
    std::uint64_t hit = acc.hit[q];
    T hit_z = acc.hit_z[q];
    for (std::size_t i = begin; i < end; ++i) {
      accumulate_one(qx, qy, samples.x[i], samples.y[i], samples.z[i], index_base + i, cfg, sum_w,
                     sum_wz, hit, hit_z);
    }
    acc.sum_w[q] = sum_w;
    acc.sum_wz[q] = sum_wz;
    acc.hit[q] = hit;
    acc.hit_z[q] = hit_z;
  }
}

template <class T>
void accumulate_workers(T qx, T qy, SampleViews<T> samples, std::size_t begin, std::size_t end,
                        std::size_t group_size, std::uint64_t index_base, WeightConfig<T> cfg,
                        LaneAccumulators<T> acc, WorkerTrace trace) {
  const std::size_t len = end > begin ? end - begin : 0;
  const std::size_t rounds = (len + group_size - 1) / group_size;
  for (std::size_t t = 0; t < group_size; ++t) {
    std::uint32_t done = 0;
    for (std::size_t k = 0; k < rounds; ++k) {
      const std::size_t i = begin + k * group_size + t;
      if (i >= end) break;
      accumulate_one(qx, qy, samples.x[i], samples.y[i], samples.z[i], index_base + i, cfg,
                     acc.sum_w[t], acc.sum_wz[t], acc.hit[t], acc.hit_z[t]);
      ++done;
    }
    if (trace.iterations != nullptr) trace.iterations[t] += static_cast<std::uint32_t>(rounds);
    if (trace.points != nullptr) trace.points[t] += done;
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

}  // namespace idw::kernels::scalar
