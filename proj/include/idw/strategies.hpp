#pragma once
// Parallel execution strategies over a LayoutStore.
//
//   naive            one task per query, scanning every sample
//   tiled            queries in groups of G; samples staged tile by tile
//                    (T per tile) into group-local scratch, loaded once per group
//   nested_original  per query, ceil(n/G) inner groups of G workers; each group
//                    tree-reduces its partial, then merges it into one shared
//                    per-query accumulator under a lock
//   nested_improved  per query, a single group of G workers; worker t takes
//                    samples t, t+G, t+2G, ...; one tree reduction, no shared
//                    accumulator
//
// All strategies agree with idw_predict_seq. naive and tiled keep the
// sequential summation order per query and are bit-identical to it.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "idw/core.hpp"
#include "idw/kernels.hpp"
#include "idw/layout_store.hpp"

namespace idw {

enum class Strategy : std::uint8_t {
  kSeq = 0,
  kNaive = 1,
  kTiled = 2,
  kNestedOriginal = 3,
  kNestedImproved = 4,
};

inline constexpr std::array<Strategy, 4> kParallelStrategies = {
    Strategy::kNaive, Strategy::kTiled, Strategy::kNestedOriginal, Strategy::kNestedImproved};

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct ExecConfig {
  std::size_t group_size = 1024;
  std::size_t tile_size = 0;  // 0 means "same as group_size"
  std::size_t parallel_width = default_parallel_width();
  bool deterministic_reduction = true;
  kernels::Isa isa = kernels::default_isa();

  std::size_t effective_tile_size() const { return tile_size == 0 ? group_size : tile_size; }
  void validate() const;

  static std::size_t default_parallel_width();
};

template <class T>
struct Accumulator {
  T sum_w = 0;
  T sum_wz = 0;
  std::uint64_t hit = kNoHit;
  T hit_z = 0;

  // Field-wise merge; the coincident sample with the lower index wins.
  friend Accumulator operator+(const Accumulator& a, const Accumulator& b) {
    Accumulator out;
    out.sum_w = a.sum_w + b.sum_w;
    out.sum_wz = a.sum_wz + b.sum_wz;
    if (b.hit < a.hit) {
      out.hit = b.hit;
      out.hit_z = b.hit_z;
    } else {
      out.hit = a.hit;
      out.hit_z = a.hit_z;
    }
    return out;
  }

  T value() const { return hit != kNoHit ? hit_z : sum_wz / sum_w; }
};

/// Balanced pairwise merge: each level combines neighbours (2i, 2i+1) and
/// carries an odd tail element up unchanged, so the merge tree depends only
/// on the list length. Throws "empty reduction" for an empty list.
template <class T>
Accumulator<T> reduce_tree(std::span<const Accumulator<T>> partials);

// Same tree, reusing the span as scratch.
template <class T>
Accumulator<T> reduce_tree_inplace(std::span<Accumulator<T>> partials);

// Run statistics reported by the strategies; only what a strategy measures
// is filled in.
struct StrategyTrace {
  std::uint64_t shared_merge_events = 0;
  std::uint64_t inner_groups = 0;
  std::uint64_t tiles_loaded = 0;
  std::uint64_t tree_reductions = 0;
  // Per (query, worker) extremes for the nested strategies.
  std::uint32_t min_worker_iterations = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t max_worker_iterations = 0;
  std::uint32_t min_worker_points = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t max_worker_points = 0;
  std::uint64_t total_worker_points = 0;

  void merge(const StrategyTrace& other);
};

std::vector<double> run_naive(const LayoutStore& store, std::span<const QueryPoint> queries,
                              const Params& params, const ExecConfig& cfg,
                              StrategyTrace* trace = nullptr);
std::vector<double> run_tiled(const LayoutStore& store, std::span<const QueryPoint> queries,
                              const Params& params, const ExecConfig& cfg,
                              StrategyTrace* trace = nullptr);
std::vector<double> run_nested_original(const LayoutStore& store,
                                        std::span<const QueryPoint> queries, const Params& params,
                                        const ExecConfig& cfg, StrategyTrace* trace = nullptr);
std::vector<double> run_nested_improved(const LayoutStore& store,
                                        std::span<const QueryPoint> queries, const Params& params,
                                        const ExecConfig& cfg, StrategyTrace* trace = nullptr);

// Dispatches on strategy. kSeq runs idw_predict_seq on the store's values
// at the store's precision.
std::vector<double> run_strategy(Strategy strategy, const LayoutStore& store,
                                 std::span<const QueryPoint> queries, const Params& params,
                                 const ExecConfig& cfg, StrategyTrace* trace = nullptr);

}  // namespace idw
