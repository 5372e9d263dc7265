#pragma once
// Benchmark harness: dataset generation, timed runs over the
// layout x strategy x precision grid, speedups and reports.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idw/core.hpp"
#include "idw/layout_store.hpp"
#include "idw/strategies.hpp"

namespace idw {

// splitmix64: state += golden gamma, then a xor-shift-multiply finalizer.
// Pure integer arithmetic, so a seed yields the same stream everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

struct Bounds {
  double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;
};

struct ValueRange {
  double lo = 0.0, hi = 100.0;
};

// Coordinates uniform in bounds and z uniform in values, drawn x, y, z per
// record from one SplitMix64 stream. Throws "no data points" for n == 0.
std::vector<PointRecord> generate_cloud(std::size_t n, std::uint64_t seed, Bounds bounds = {},
                                        ValueRange values = {});

// Queries for a benchmark run come from a second stream so they never
// coincide with the data by construction.
std::vector<QueryPoint> generate_queries(std::size_t n, std::uint64_t seed, Bounds bounds = {});

// Sum of all coordinates and values, a platform-stable fingerprint.
double cloud_checksum(std::span<const PointRecord> records);

inline constexpr std::size_t kSizeUnit = 1024;

struct RunKey {
  std::optional<LayoutKind> layout;  // empty for the sequential predictor
  Strategy strategy = Strategy::kSeq;
  Precision precision = Precision::kDouble;

  friend bool operator==(const RunKey&, const RunKey&) = default;
};

std::string to_string(const RunKey& key);

struct BenchSpec {
  std::vector<std::size_t> sizes = {10 * kSizeUnit, 50 * kSizeUnit, 100 * kSizeUnit};
  std::vector<LayoutKind> layouts{kAllLayouts.begin(), kAllLayouts.end()};
  std::vector<Strategy> strategies{kParallelStrategies.begin(), kParallelStrategies.end()};
  std::vector<Precision> precisions = {Precision::kSingle, Precision::kDouble};
  Params params;
  std::size_t repeats = 5;
  std::size_t warmup = 1;
  std::uint64_t seed = 1;
  RunKey baseline;  // sequential predictor at double
  ExecConfig exec;

  void validate() const;
};

struct BenchRecord {
  RunKey key;
  std::size_t n = 0;
  double p = 2.0;
  bool available = true;  // false: illegal layout/precision ("n/a" row)
  std::vector<double> times;
  double median_s = 0.0;
  double min_s = 0.0;
  double speedup = 0.0;
  double checksum = 0.0;
};

// One timed configuration on pre-generated inputs: warmup runs, then
// `repeats` timed runs; the checksum is the double sum of the last run's
// predictions. Illegal layout/precision pairs return an unavailable record.
BenchRecord time_run(const RunKey& key, std::span<const PointRecord> data,
                     std::span<const QueryPoint> queries, const BenchSpec& spec);

struct SpeedupRow {
  RunKey key;
  std::size_t n = 0;
  double median_s = 0.0;
  double speedup = 0.0;
};

// Speedup of every available record against the baseline record of the
// same n. Throws "baseline not found" when a size has no baseline.
std::vector<SpeedupRow> speedup_table(std::span<const BenchRecord> records, const RunKey& baseline);

// Full grid. The baseline is always timed once per size (and reported as
// its own row); speedups are filled in.
std::vector<BenchRecord> run_bench(const BenchSpec& spec, std::ostream* progress = nullptr);

enum class ReportFormat { kCsv, kMarkdown };

void write_report_csv(std::ostream& out, std::span<const BenchRecord> records);
void write_report_markdown(std::ostream& out, std::span<const BenchRecord> records);
// Unwritable path -> ErrorKind::kIo with the path in the message.
void emit_report(std::span<const BenchRecord> records, ReportFormat format,
                 const std::filesystem::path& path);

// Parses a report CSV back (times are not stored in the CSV; median/min
// come back as the single known samples).
std::vector<BenchRecord> read_report_csv(std::istream& in);

// "10k" / "10K" -> 10240, plain integers as is.
std::size_t parse_size(std::string_view text);

}  // namespace idw
