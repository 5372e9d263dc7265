#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "idw/core.hpp"

namespace test {

inline std::vector<idw::PointRecord> random_records(std::size_t n, std::uint64_t seed,
                                                    double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(lo, hi);
  std::uniform_real_distribution<double> value(-50.0, 150.0);
  std::vector<idw::PointRecord> out(n);
  for (auto& r : out) {
    r.x = coord(rng);
    r.y = coord(rng);
    r.z = value(rng);
  }
  return out;
}

inline std::vector<idw::QueryPoint> random_queries(std::size_t m, std::uint64_t seed,
                                                   double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed ^ 0x5555);
  std::uniform_real_distribution<double> coord(lo, hi);
  std::vector<idw::QueryPoint> out(m);
  for (auto& q : out) {
    q.x = coord(rng);
    q.y = coord(rng);
  }
  return out;
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

inline double max_rel_err(std::span<const double> got, std::span<const double> want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, rel_err(got[i], want[i]));
  return worst;
}

// Distance in representable doubles between two finite values.
inline std::uint64_t ulp_distance(double a, double b) {
  auto key = [](double v) {
    const auto bits = std::bit_cast<std::int64_t>(v);
    return bits < 0 ? std::numeric_limits<std::int64_t>::min() - bits : bits;
  };
  const std::int64_t ka = key(a), kb = key(b);
  return ka > kb ? static_cast<std::uint64_t>(ka - kb) : static_cast<std::uint64_t>(kb - ka);
}

inline std::uint64_t ulp_distance(float a, float b) {
  auto key = [](float v) {
    const auto bits = std::bit_cast<std::int32_t>(v);
    return static_cast<std::int64_t>(bits < 0 ? std::numeric_limits<std::int32_t>::min() - bits
                                              : bits);
  };
  const std::int64_t ka = key(a), kb = key(b);
  return static_cast<std::uint64_t>(ka > kb ? ka - kb : kb - ka);
}

inline bool bit_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

// Fresh scratch directory per call, removed by the destructor.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("idw_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace test
