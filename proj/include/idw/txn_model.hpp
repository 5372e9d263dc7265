#pragma once
// Segment-counting model of coalesced memory transactions.
//
// A warp of W consecutive lanes reads the requested components of points
// base_offset .. base_offset + W - 1. Each buffer of the layout is assumed
// to start on an S-byte boundary; the model counts the distinct S-byte
// segments touched across all buffers. No caches, sectors or replays.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "idw/layout_store.hpp"

namespace idw {

struct AccessPattern {
  LayoutKind layout = LayoutKind::kSoA;
  Precision precision = Precision::kSingle;
  ComponentSet components = ComponentSet::of(Component::kX);
  std::size_t warp_size = 32;
  std::size_t segment_bytes = 128;
  std::size_t base_offset = 0;

  void validate() const;
};

struct TransactionReport {
  std::uint64_t segments = 0;
  std::uint64_t useful_bytes = 0;
  std::uint64_t fetched_bytes = 0;
  double utilization = 0.0;

  friend bool operator==(const TransactionReport&, const TransactionReport&) = default;
};

TransactionReport count_transactions(const AccessPattern& pattern);

struct ScorecardRow {
  LayoutKind layout = LayoutKind::kSoA;
  Precision precision = Precision::kSingle;
  ComponentSet components;
  std::size_t warp_size = 0;
  std::size_t segment_bytes = 0;
  std::optional<TransactionReport> report;  // empty for illegal layouts ("n/a")
};

// One row per layout, in LayoutKind order.
std::vector<ScorecardRow> layout_scorecard(Precision precision, ComponentSet components,
                                           std::size_t warp_size = 32,
                                           std::size_t segment_bytes = 128,
                                           std::size_t base_offset = 0);

void write_scorecard_csv(std::ostream& out, const std::vector<ScorecardRow>& rows);

}  // namespace idw
