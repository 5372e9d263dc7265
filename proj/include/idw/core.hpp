#pragma once
// IDW core: point records, parameters, distance/weight math and the
// sequential reference predictor every parallel strategy is checked against.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace idw {

// Errors carry a category so front ends can map them to exit codes.
enum class ErrorKind { kUsage, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return Error(ErrorKind::kUsage, what); }
inline Error io_error(const std::string& what) { return Error(ErrorKind::kIo, what); }

struct PointRecord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

struct QueryPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const QueryPoint&, const QueryPoint&) = default;
};

struct Params {
  double p = 2.0;
  // Squared distances at or below this make a query coincident with a sample.
  double zero_eps = 0.0;

  void validate() const;
};

enum class Precision : std::uint8_t { kSingle = 0, kDouble = 1 };

std::string_view to_string(Precision precision);
Precision parse_precision(std::string_view text);

inline constexpr std::uint64_t kNoHit = std::numeric_limits<std::uint64_t>::max();

template <class T>
constexpr T squared_distance(T qx, T qy, T dx, T dy) noexcept {
  const T ex = qx - dx;
  const T ey = qy - dy;
  return ex * ex + ey * ey;
}

namespace detail {
inline float pow_same(float base, float exponent) noexcept { return ::powf(base, exponent); }
inline double pow_same(double base, double exponent) noexcept { return std::pow(base, exponent); }
}  // namespace detail

/// General-exponent weight d^-p evaluated from the squared distance, at
/// the precision of T.
template <class T>
T weight_general(T d2, T p) noexcept {
  return detail::pow_same(d2, -p / T(2));
}

/// Inverse-distance weight from a squared distance. p == 2 takes the
/// reciprocal directly, without a square root or pow call.
/// Precondition: d2 > 0.
template <class T>
T weight(T d2, double p) noexcept {
  if (p == 2.0) return T(1) / d2;
  return weight_general<T>(d2, static_cast<T>(p));
}

bool is_finite(const PointRecord& r) noexcept;
bool is_finite(const QueryPoint& q) noexcept;

// Throws "no data points" / "invalid coordinate".
void validate_inputs(std::span<const PointRecord> data, std::span<const QueryPoint> queries);

/// Sequential reference predictor. One left-to-right pass per query at the
/// requested precision (inputs are rounded to float first for kSingle).
/// A query whose squared distance to some sample is <= zero_eps returns the
/// z of the lowest-index such sample.
std::vector<double> idw_predict_seq(std::span<const PointRecord> data,
                                    std::span<const QueryPoint> queries, const Params& params,
                                    Precision precision);

std::vector<QueryPoint> to_queries(std::span<const PointRecord> records);

}  // namespace idw
