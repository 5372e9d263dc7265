#include "idw/core.hpp"

namespace idw {

void Params::validate() const {
  if (!(p > 0.0) || !std::isfinite(p)) throw usage_error("power parameter must be > 0");
  if (!(zero_eps >= 0.0) || !std::isfinite(zero_eps)) throw usage_error("zero_eps must be >= 0");
}

std::string_view to_string(Precision precision) {
  return precision == Precision::kSingle ? "single" : "double";
}

Precision parse_precision(std::string_view text) {
  if (text == "single" || text == "float" || text == "f32") return Precision::kSingle;
  if (text == "double" || text == "f64") return Precision::kDouble;
  throw usage_error("unknown precision '" + std::string(text) + "'");
}

bool is_finite(const PointRecord& r) noexcept {
  return std::isfinite(r.x) && std::isfinite(r.y) && std::isfinite(r.z);
}

bool is_finite(const QueryPoint& q) noexcept { return std::isfinite(q.x) && std::isfinite(q.y); }

void validate_inputs(std::span<const PointRecord> data, std::span<const QueryPoint> queries) {
  if (data.empty()) throw usage_error("no data points");
  for (const auto& r : data) {
    if (!is_finite(r)) throw usage_error("invalid coordinate");
  }
  for (const auto& q : queries) {
    if (!is_finite(q)) throw usage_error("invalid coordinate");
  }
}

namespace {

template <class T>
std::vector<double> predict_seq(std::span<const PointRecord> data,
                                std::span<const QueryPoint> queries, const Params& params) {
  // Round once up front so every sample is seen at run precision.
  std::vector<T> xs(data.size()), ys(data.size()), zs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    xs[i] = static_cast<T>(data[i].x);
    ys[i] = static_cast<T>(data[i].y);
    zs[i] = static_cast<T>(data[i].z);
  }
  const T eps = static_cast<T>(params.zero_eps);

  std::vector<double> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const T qx = static_cast<T>(q.x);
    const T qy = static_cast<T>(q.y);
    T sum_w = 0;
    T sum_wz = 0;
    std::uint64_t hit = kNoHit;
    T hit_z = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const T d2 = squared_distance(qx, qy, xs[i], ys[i]);
      if (d2 <= eps) {
        if (hit == kNoHit) {
          hit = i;
          hit_z = zs[i];
        }
        continue;
      }
      const T w = weight<T>(d2, params.p);
      sum_w += w;
      sum_wz += w * zs[i];
    }
    out.push_back(hit != kNoHit ? static_cast<double>(hit_z)
                                : static_cast<double>(sum_wz / sum_w));
  }
  return out;
}

}  // namespace

std::vector<double> idw_predict_seq(std::span<const PointRecord> data,
                                    std::span<const QueryPoint> queries, const Params& params,
                                    Precision precision) {
  params.validate();
  validate_inputs(data, queries);
  return precision == Precision::kSingle ? predict_seq<float>(data, queries, params)
                                         : predict_seq<double>(data, queries, params);
}

std::vector<QueryPoint> to_queries(std::span<const PointRecord> records) {
  std::vector<QueryPoint> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.x, r.y});
  return out;
}

}  // namespace idw
