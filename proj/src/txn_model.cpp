#include "idw/txn_model.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <ostream>

namespace idw {

void AccessPattern::validate() const {
  require_legal(layout, precision);
  if (components.empty()) throw usage_error("empty component set");
  if (warp_size == 0) throw usage_error("warp size must be >= 1");
  if (segment_bytes < 32 || !std::has_single_bit(segment_bytes)) {
    throw usage_error("segment size must be a power of two >= 32");
  }
}

TransactionReport count_transactions(const AccessPattern& pattern) {
  pattern.validate();
  const LayoutShape shape = layout_shape(pattern.layout, pattern.precision);
  const std::uint64_t e = shape.element_bytes;
  const std::uint64_t seg = pattern.segment_bytes;

  TransactionReport r;
  for (std::size_t b = 0; b < shape.buffer_count; ++b) {
    // Requested fields of this buffer, in record order.
    std::vector<std::uint64_t> offsets;
    for (auto c : {Component::kX, Component::kY, Component::kZ}) {
      if (pattern.components.contains(c) && shape.at(c).buffer == b) {
        offsets.push_back(shape.at(c).offset_bytes);
      }
    }
    if (offsets.empty()) continue;
    std::sort(offsets.begin(), offsets.end());

    // Byte ranges arrive in ascending order (lane-major, field-minor), so one
    // sweep that remembers the last counted segment deduplicates them.
    const std::uint64_t stride = shape.record_bytes[b];
    bool any = false;
    std::uint64_t last = 0;
    for (std::size_t lane = 0; lane < pattern.warp_size; ++lane) {
      const std::uint64_t record = (pattern.base_offset + lane) * stride;
      for (const auto off : offsets) {
        const std::uint64_t first_seg = (record + off) / seg;
        const std::uint64_t last_seg = (record + off + e - 1) / seg;
        if (!any || first_seg > last) {
          r.segments += last_seg - first_seg + 1;
        } else if (last_seg > last) {
          r.segments += last_seg - last;
        }
        last = any ? std::max(last, last_seg) : last_seg;
        any = true;
      }
    }
  }
  r.useful_bytes = static_cast<std::uint64_t>(pattern.warp_size) * pattern.components.size() * e;
  r.fetched_bytes = r.segments * seg;
  r.utilization = static_cast<double>(r.useful_bytes) / static_cast<double>(r.fetched_bytes);
  return r;
}

std::vector<ScorecardRow> layout_scorecard(Precision precision, ComponentSet components,
                                           std::size_t warp_size, std::size_t segment_bytes,
                                           std::size_t base_offset) {
  std::vector<ScorecardRow> rows;
  for (auto kind : kAllLayouts) {
    ScorecardRow row{kind, precision, components, warp_size, segment_bytes, std::nullopt};
    if (is_legal(kind, precision)) {
      row.report = count_transactions(
          {kind, precision, components, warp_size, segment_bytes, base_offset});
    }
    rows.push_back(row);
  }
  return rows;
}

void write_scorecard_csv(std::ostream& out, const std::vector<ScorecardRow>& rows) {
  out << "layout,precision,components,warp,segment_bytes,segments,useful_bytes,fetched_bytes,"
         "utilization\n";
  for (const auto& row : rows) {
    out << to_string(row.layout) << ',' << to_string(row.precision) << ','
        << to_string(row.components) << ',' << row.warp_size << ',' << row.segment_bytes << ',';
    if (!row.report) {
      out << "n/a,n/a,n/a,n/a\n";
      continue;
    }
    char util[32];
    std::snprintf(util, sizeof(util), "%.10g", row.report->utilization);
    out << row.report->segments << ',' << row.report->useful_bytes << ','
        << row.report->fetched_bytes << ',' << util << '\n';
  }
}

}  // namespace idw
