#include "idw/strategies.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace idw {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kSeq: return "seq";
    case Strategy::kNaive: return "naive";
    case Strategy::kTiled: return "tiled";
    case Strategy::kNestedOriginal: return "nested-original";
    case Strategy::kNestedImproved: return "nested-improved";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "seq" || s == "sequential") return Strategy::kSeq;
  if (s == "naive") return Strategy::kNaive;
  if (s == "tiled") return Strategy::kTiled;
  if (s == "nested-original" || s == "cdp-original") return Strategy::kNestedOriginal;
  if (s == "nested-improved" || s == "cdp-improved" || s == "nested") {
    return Strategy::kNestedImproved;
  }
  throw usage_error("unknown strategy '" + std::string(text) + "'");
}

std::size_t ExecConfig::default_parallel_width() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void ExecConfig::validate() const {
  if (group_size == 0) throw usage_error("group size must be >= 1");
  if (effective_tile_size() == 0) throw usage_error("tile size must be >= 1");
  if (parallel_width == 0) throw usage_error("parallel width must be >= 1");
}

void StrategyTrace::merge(const StrategyTrace& o) {
  shared_merge_events += o.shared_merge_events;
  inner_groups += o.inner_groups;
  tiles_loaded += o.tiles_loaded;
  tree_reductions += o.tree_reductions;
  min_worker_iterations = std::min(min_worker_iterations, o.min_worker_iterations);
  max_worker_iterations = std::max(max_worker_iterations, o.max_worker_iterations);
  min_worker_points = std::min(min_worker_points, o.min_worker_points);
  max_worker_points = std::max(max_worker_points, o.max_worker_points);
  total_worker_points += o.total_worker_points;
}

template <class T>
Accumulator<T> reduce_tree_inplace(std::span<Accumulator<T>> a) {
  if (a.empty()) throw usage_error("empty reduction");
  std::size_t len = a.size();
  while (len > 1) {
    const std::size_t pairs = len / 2;
    for (std::size_t i = 0; i < pairs; ++i) a[i] = a[2 * i] + a[2 * i + 1];
    if (len % 2 != 0) a[pairs] = a[len - 1];
    len = pairs + len % 2;
  }
  return a[0];
}

template <class T>
Accumulator<T> reduce_tree(std::span<const Accumulator<T>> partials) {
  std::vector<Accumulator<T>> scratch(partials.begin(), partials.end());
  return reduce_tree_inplace<T>(scratch);
}

template Accumulator<float> reduce_tree<float>(std::span<const Accumulator<float>>);
template Accumulator<double> reduce_tree<double>(std::span<const Accumulator<double>>);
template Accumulator<float> reduce_tree_inplace<float>(std::span<Accumulator<float>>);
template Accumulator<double> reduce_tree_inplace<double>(std::span<Accumulator<double>>);

namespace {

// Static block partition of [0, count) over `width` workers. Worker 0 runs
// on the calling thread.
void parallel_blocks(std::size_t width, std::size_t count,
                     const std::function<void(std::size_t worker, std::size_t begin,
                                              std::size_t end)>& body) {
  width = std::max<std::size_t>(1, std::min(width, count));
  if (width == 1) {
    if (count > 0) body(0, 0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(width);
  auto run = [&](std::size_t w) {
    const std::size_t begin = count * w / width;
    const std::size_t end = count * (w + 1) / width;
    try {
      body(w, begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    threads.reserve(width - 1);
    for (std::size_t w = 1; w < width; ++w) threads.emplace_back(run, w);
    run(0);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class T>
struct QueryArrays {
  std::vector<T> x, y;
};

template <class T>
QueryArrays<T> stage_queries(std::span<const QueryPoint> queries) {
  QueryArrays<T> out;
  out.x.resize(queries.size());
  out.y.resize(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!is_finite(queries[i])) throw usage_error("invalid coordinate");
    out.x[i] = static_cast<T>(queries[i].x);
    out.y[i] = static_cast<T>(queries[i].y);
  }
  return out;
}

// Structure-of-arrays accumulators for a block of lanes.
template <class T>
struct LaneBuffer {
  std::vector<T> sum_w, sum_wz, hit_z;
  std::vector<std::uint64_t> hit;

  explicit LaneBuffer(std::size_t n) : sum_w(n), sum_wz(n), hit_z(n), hit(n, kNoHit) {}

  void reset() {
    std::fill(sum_w.begin(), sum_w.end(), T(0));
    std::fill(sum_wz.begin(), sum_wz.end(), T(0));
    std::fill(hit_z.begin(), hit_z.end(), T(0));
    std::fill(hit.begin(), hit.end(), kNoHit);
  }
  kernels::LaneAccumulators<T> lanes(std::size_t offset = 0) {
    return {sum_w.data() + offset, sum_wz.data() + offset, hit.data() + offset,
            hit_z.data() + offset};
  }
  Accumulator<T> at(std::size_t i) const { return {sum_w[i], sum_wz[i], hit[i], hit_z[i]}; }
};

template <class T>
kernels::SampleViews<T> store_views(const LayoutStore& store) {
  return {store.view<T>(Component::kX), store.view<T>(Component::kY),
          store.view<T>(Component::kZ)};
}

template <class T>
kernels::WeightConfig<T> weight_config(const Params& params) {
  return {static_cast<T>(params.zero_eps), params.p};
}

struct Prepared {
  std::size_t n = 0;
  std::size_t m = 0;
};

Prepared prepare(const LayoutStore& store, std::span<const QueryPoint> queries,
                 const Params& params, const ExecConfig& cfg) {
  params.validate();
  cfg.validate();
  if (store.size() == 0) throw usage_error("no data points");
  return {store.size(), queries.size()};
}

// Per-OS-worker trace shards merged once at the end.
class TraceShards {
 public:
  TraceShards(StrategyTrace* sink, std::size_t width) : sink_(sink), shards_(width) {}
  StrategyTrace& operator[](std::size_t w) { return shards_[w]; }
  bool enabled() const { return sink_ != nullptr; }
  ~TraceShards() {
    if (sink_ == nullptr) return;
    for (const auto& s : shards_) sink_->merge(s);
  }

 private:
  StrategyTrace* sink_;
  std::vector<StrategyTrace> shards_;
};

template <class T>
std::vector<double> naive_impl(const LayoutStore& store, std::span<const QueryPoint> queries,
                               const Params& params, const ExecConfig& cfg) {
  const auto [n, m] = prepare(store, queries, params, cfg);
  const auto q = stage_queries<T>(queries);
  const auto& table = kernels::kernel_table<T>(cfg.isa);
  const auto views = store_views<T>(store);
  const auto wcfg = weight_config<T>(params);
  LaneBuffer<T> acc(m);

  parallel_blocks(cfg.parallel_width, m, [&](std::size_t, std::size_t begin, std::size_t end) {
    kernels::QueryBlock<T> block{q.x.data() + begin, q.y.data() + begin, end - begin};
    table.accumulate_queries(block, views, 0, n, 0, wcfg, acc.lanes(begin));
    // Every query reads every sample once.
    store.count_reads(ComponentSet::all(), static_cast<std::uint64_t>(end - begin) * n);
  });

  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<double>(acc.at(i).value());
  return out;
}

template <class T>
std::vector<double> tiled_impl(const LayoutStore& store, std::span<const QueryPoint> queries,
                               const Params& params, const ExecConfig& cfg,
                               StrategyTrace* trace) {
  const auto [n, m] = prepare(store, queries, params, cfg);
  const auto q = stage_queries<T>(queries);
  const auto& table = kernels::kernel_table<T>(cfg.isa);
  const auto views = store_views<T>(store);
  const auto wcfg = weight_config<T>(params);
  const std::size_t group = cfg.group_size;
  const std::size_t tile = cfg.effective_tile_size();
  const std::size_t groups = (m + group - 1) / group;
  LaneBuffer<T> acc(m);
  TraceShards shards(trace, std::max<std::size_t>(1, cfg.parallel_width));

  parallel_blocks(cfg.parallel_width, groups, [&](std::size_t w, std::size_t g_begin,
                                                  std::size_t g_end) {
    // Group-local scratch, one tile of samples.
    std::vector<T> sx(tile), sy(tile), sz(tile);
    const kernels::SampleViews<T> scratch{{sx.data(), 1}, {sy.data(), 1}, {sz.data(), 1}};
    std::uint64_t loaded = 0;
    std::uint64_t tiles = 0;
    for (std::size_t g = g_begin; g < g_end; ++g) {
      const std::size_t q_begin = g * group;
      const std::size_t q_end = std::min(m, q_begin + group);
      kernels::QueryBlock<T> block{q.x.data() + q_begin, q.y.data() + q_begin, q_end - q_begin};
      for (std::size_t start = 0; start < n; start += tile) {
        const std::size_t len = std::min(tile, n - start);
        for (std::size_t i = 0; i < len; ++i) {
          sx[i] = views.x[start + i];
          sy[i] = views.y[start + i];
          sz[i] = views.z[start + i];
        }
        loaded += len;
        ++tiles;
        table.accumulate_queries(block, scratch, 0, len, start, wcfg, acc.lanes(q_begin));
      }
    }
    store.count_reads(ComponentSet::all(), loaded);
    if (shards.enabled()) shards[w].tiles_loaded += tiles;
  });

  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<double>(acc.at(i).value());
  return out;
}

// One level of the pairwise merge tree over plain sums.
template <class T>
void pair_level(const T* __restrict src, T* __restrict dst, std::size_t len) {
  const std::size_t pairs = len / 2;
  for (std::size_t i = 0; i < pairs; ++i) dst[i] = src[2 * i] + src[2 * i + 1];
  if (len % 2 != 0) dst[pairs] = src[len - 1];
}

// Worker-group scratch for the nested strategies.
template <class T>
struct WorkerGroup {
  LaneBuffer<T> lanes;
  std::vector<T> scratch_w, scratch_wz;
  std::vector<std::uint32_t> iterations, points;

  WorkerGroup(std::size_t g, bool traced)
      : lanes(g),
        scratch_w(g / 2 + 1),
        scratch_wz(g / 2 + 1),
        iterations(traced ? g : 0),
        points(traced ? g : 0) {}

  kernels::WorkerTrace trace() {
    if (iterations.empty()) return {};
    std::fill(iterations.begin(), iterations.end(), 0u);
    std::fill(points.begin(), points.end(), 0u);
    return {iterations.data(), points.data()};
  }

  void fold_trace(StrategyTrace& t) const {
    for (std::size_t i = 0; i < iterations.size(); ++i) {
      t.min_worker_iterations = std::min(t.min_worker_iterations, iterations[i]);
      t.max_worker_iterations = std::max(t.max_worker_iterations, iterations[i]);
      t.min_worker_points = std::min(t.min_worker_points, points[i]);
      t.max_worker_points = std::max(t.max_worker_points, points[i]);
      t.total_worker_points += points[i];
    }
  }

  // reduce_tree over the G private accumulators, evaluated directly on the
  // lane arrays: identical merge tree, ping-ponging between two buffers.
  // The hit merge takes the minimum index, which is the same for any tree.
  Accumulator<T> reduce() {
    T* src_w = lanes.sum_w.data();
    T* src_wz = lanes.sum_wz.data();
    T* dst_w = scratch_w.data();
    T* dst_wz = scratch_wz.data();
    std::size_t len = lanes.sum_w.size();
    while (len > 1) {
      pair_level(src_w, dst_w, len);
      pair_level(src_wz, dst_wz, len);
      len = len / 2 + len % 2;
      std::swap(src_w, dst_w);
      std::swap(src_wz, dst_wz);
    }
    Accumulator<T> total{src_w[0], src_wz[0], kNoHit, T(0)};
    const auto& hits = lanes.hit;
    const auto best = std::min_element(hits.begin(), hits.end());
    if (*best != kNoHit) {
      total.hit = *best;
      total.hit_z = lanes.hit_z[static_cast<std::size_t>(best - hits.begin())];
    }
    return total;
  }
};

template <class T>
std::vector<double> nested_improved_impl(const LayoutStore& store,
                                         std::span<const QueryPoint> queries,
                                         const Params& params, const ExecConfig& cfg,
                                         StrategyTrace* trace) {
  const auto [n, m] = prepare(store, queries, params, cfg);
  const auto q = stage_queries<T>(queries);
  const auto& table = kernels::kernel_table<T>(cfg.isa);
  const auto views = store_views<T>(store);
  const auto wcfg = weight_config<T>(params);
  const std::size_t group = cfg.group_size;
  std::vector<double> out(m);
  TraceShards shards(trace, std::max<std::size_t>(1, cfg.parallel_width));

  parallel_blocks(cfg.parallel_width, m, [&](std::size_t w, std::size_t begin, std::size_t end) {
    WorkerGroup<T> wg(group, shards.enabled());
    for (std::size_t i = begin; i < end; ++i) {
      wg.lanes.reset();
      // One group per query; each worker owns its private accumulator.
      table.accumulate_workers(q.x[i], q.y[i], views, 0, n, group, 0, wcfg, wg.lanes.lanes(),
                               wg.trace());
      out[i] = static_cast<double>(wg.reduce().value());
      if (shards.enabled()) {
        wg.fold_trace(shards[w]);
        shards[w].inner_groups += 1;
        shards[w].tree_reductions += 1;
      }
    }
    store.count_reads(ComponentSet::all(), static_cast<std::uint64_t>(end - begin) * n);
  });
  return out;
}

// The merge point every inner group of a query funnels into.
template <class T>
class SharedAccumulator {
 public:
  void merge(const Accumulator<T>& partial) {
    std::lock_guard lock(mutex_);
    value_ = value_ + partial;
    ++merges_;
  }
  Accumulator<T> value() const { return value_; }
  std::uint64_t merges() const { return merges_; }

 private:
  std::mutex mutex_;
  Accumulator<T> value_;
  std::uint64_t merges_ = 0;
};

template <class T>
std::vector<double> nested_original_impl(const LayoutStore& store,
                                         std::span<const QueryPoint> queries,
                                         const Params& params, const ExecConfig& cfg,
                                         StrategyTrace* trace) {
  const auto [n, m] = prepare(store, queries, params, cfg);
  const auto q = stage_queries<T>(queries);
  const auto& table = kernels::kernel_table<T>(cfg.isa);
  const auto views = store_views<T>(store);
  const auto wcfg = weight_config<T>(params);
  const std::size_t group = cfg.group_size;
  const std::size_t groups = (n + group - 1) / group;
  const std::size_t width = std::max<std::size_t>(1, cfg.parallel_width);
  std::unique_ptr<SharedAccumulator<T>[]> shared(new SharedAccumulator<T>[m]);
  TraceShards shards(trace, width);

  auto run_group = [&](WorkerGroup<T>& wg, std::size_t qi, std::size_t g, StrategyTrace* t) {
    wg.lanes.reset();
    const std::size_t begin = g * group;
    const std::size_t end = std::min(n, begin + group);
    table.accumulate_workers(q.x[qi], q.y[qi], views, begin, end, group, 0, wcfg,
                             wg.lanes.lanes(), wg.trace());
    shared[qi].merge(wg.reduce());
    if (t != nullptr) {
      wg.fold_trace(*t);
      t->inner_groups += 1;
      t->tree_reductions += 1;
    }
  };

  if (cfg.deterministic_reduction) {
    // Each query's groups run in index order on one worker, so the merge
    // sequence is fixed.
    parallel_blocks(width, m, [&](std::size_t w, std::size_t begin, std::size_t end) {
      WorkerGroup<T> wg(group, shards.enabled());
      for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t g = 0; g < groups; ++g) {
          run_group(wg, i, g, shards.enabled() ? &shards[w] : nullptr);
        }
      }
      store.count_reads(ComponentSet::all(), static_cast<std::uint64_t>(end - begin) * n);
    });
  } else {
    // (query, group) items are claimed dynamically by all workers; merges
    // land in completion order.
    const std::size_t items = m * groups;
    std::atomic<std::size_t> next{0};
    parallel_blocks(width, width, [&](std::size_t w, std::size_t, std::size_t) {
      WorkerGroup<T> wg(group, shards.enabled());
      std::uint64_t reads = 0;
      for (std::size_t item = next.fetch_add(1); item < items; item = next.fetch_add(1)) {
        const std::size_t i = item / groups;
        const std::size_t g = item % groups;
        run_group(wg, i, g, shards.enabled() ? &shards[w] : nullptr);
        reads += std::min(n, (g + 1) * group) - g * group;
      }
      store.count_reads(ComponentSet::all(), reads);
    });
  }

  std::vector<double> out(m);
  std::uint64_t merges = 0;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = static_cast<double>(shared[i].value().value());
    merges += shared[i].merges();
  }
  if (trace != nullptr) trace->shared_merge_events += merges;
  return out;
}

}  // namespace

std::vector<double> run_naive(const LayoutStore& store, std::span<const QueryPoint> queries,
                              const Params& params, const ExecConfig& cfg, StrategyTrace*) {
  return store.precision() == Precision::kSingle ? naive_impl<float>(store, queries, params, cfg)
                                                 : naive_impl<double>(store, queries, params, cfg);
}

std::vector<double> run_tiled(const LayoutStore& store, std::span<const QueryPoint> queries,
                              const Params& params, const ExecConfig& cfg, StrategyTrace* trace) {
  return store.precision() == Precision::kSingle
             ? tiled_impl<float>(store, queries, params, cfg, trace)
             : tiled_impl<double>(store, queries, params, cfg, trace);
}

std::vector<double> run_nested_original(const LayoutStore& store,
                                        std::span<const QueryPoint> queries, const Params& params,
                                        const ExecConfig& cfg, StrategyTrace* trace) {
  return store.precision() == Precision::kSingle
             ? nested_original_impl<float>(store, queries, params, cfg, trace)
             : nested_original_impl<double>(store, queries, params, cfg, trace);
}

std::vector<double> run_nested_improved(const LayoutStore& store,
                                        std::span<const QueryPoint> queries, const Params& params,
                                        const ExecConfig& cfg, StrategyTrace* trace) {
  return store.precision() == Precision::kSingle
             ? nested_improved_impl<float>(store, queries, params, cfg, trace)
             : nested_improved_impl<double>(store, queries, params, cfg, trace);
}

std::vector<double> run_strategy(Strategy strategy, const LayoutStore& store,
                                 std::span<const QueryPoint> queries, const Params& params,
                                 const ExecConfig& cfg, StrategyTrace* trace) {
  switch (strategy) {
    case Strategy::kSeq: {
      const auto data = store.records();
      return idw_predict_seq(data, queries, params, store.precision());
    }
    case Strategy::kNaive: return run_naive(store, queries, params, cfg, trace);
    case Strategy::kTiled: return run_tiled(store, queries, params, cfg, trace);
    case Strategy::kNestedOriginal: return run_nested_original(store, queries, params, cfg, trace);
    case Strategy::kNestedImproved: return run_nested_improved(store, queries, params, cfg, trace);
  }
  throw usage_error("unknown strategy");
}

}  // namespace idw
