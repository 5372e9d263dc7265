#include "idw/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "idw/point_io.hpp"

namespace idw {

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<PointRecord> generate_cloud(std::size_t n, std::uint64_t seed, Bounds bounds,
                                        ValueRange values) {
  if (n == 0) throw usage_error("no data points");
  SplitMix64 rng(seed);
  std::vector<PointRecord> out(n);
  for (auto& r : out) {
    r.x = bounds.x_min + rng.uniform() * (bounds.x_max - bounds.x_min);
    r.y = bounds.y_min + rng.uniform() * (bounds.y_max - bounds.y_min);
    r.z = values.lo + rng.uniform() * (values.hi - values.lo);
  }
  return out;
}

std::vector<QueryPoint> generate_queries(std::size_t n, std::uint64_t seed, Bounds bounds) {
  SplitMix64 rng(seed ^ 0xD1B54A32D192ED03ull);
  std::vector<QueryPoint> out(n);
  for (auto& q : out) {
    q.x = bounds.x_min + rng.uniform() * (bounds.x_max - bounds.x_min);
    q.y = bounds.y_min + rng.uniform() * (bounds.y_max - bounds.y_min);
  }
  return out;
}

double cloud_checksum(std::span<const PointRecord> records) {
  double sum = 0.0;
  for (const auto& r : records) sum += r.x + r.y + r.z;
  return sum;
}

std::string to_string(const RunKey& key) {
  std::string out = key.layout ? std::string(to_string(*key.layout)) : "none";
  out += '/';
  out += to_string(key.strategy);
  out += '/';
  out += to_string(key.precision);
  return out;
}

void BenchSpec::validate() const {
  if (repeats == 0) throw usage_error("repeats must be >= 1");
  if (sizes.empty()) throw usage_error("no sizes selected");
  for (auto n : sizes) {
    if (n == 0) throw usage_error("no data points");
  }
  params.validate();
  exec.validate();
  if (baseline.strategy != Strategy::kSeq && !baseline.layout) {
    throw usage_error("baseline needs a layout unless it is the sequential predictor");
  }
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 != 0 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

BenchRecord time_run(const RunKey& key, std::span<const PointRecord> data,
                     std::span<const QueryPoint> queries, const BenchSpec& spec) {
  BenchRecord rec;
  rec.key = key;
  rec.n = data.size();
  rec.p = spec.params.p;
  if (key.layout && !is_legal(*key.layout, key.precision)) {
    rec.available = false;
    return rec;
  }

  // The sequential predictor reads the records directly and does no layout work.
  std::optional<LayoutStore> store;
  if (key.layout) store.emplace(LayoutStore::build(data, *key.layout, key.precision));
  auto run_once = [&] {
    if (!store) return idw_predict_seq(data, queries, spec.params, key.precision);
    return run_strategy(key.strategy, *store, queries, spec.params, spec.exec);
  };

  for (std::size_t w = 0; w < spec.warmup; ++w) (void)run_once();
  std::vector<double> last;
  for (std::size_t r = 0; r < spec.repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    last = run_once();
    const auto stop = std::chrono::steady_clock::now();
    rec.times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  rec.median_s = median_of(rec.times);
  rec.min_s = *std::min_element(rec.times.begin(), rec.times.end());
  rec.checksum = std::accumulate(last.begin(), last.end(), 0.0);
  return rec;
}

std::vector<SpeedupRow> speedup_table(std::span<const BenchRecord> records,
                                      const RunKey& baseline) {
  std::map<std::size_t, double> base;
  for (const auto& r : records) {
    if (r.available && r.key == baseline) base[r.n] = r.median_s;
  }
  std::vector<SpeedupRow> rows;
  for (const auto& r : records) {
    if (!r.available) continue;
    const auto it = base.find(r.n);
    if (it == base.end()) throw usage_error("baseline not found");
    SpeedupRow row{r.key, r.n, r.median_s, 0.0};
    row.speedup = r.key == baseline ? 1.0 : it->second / r.median_s;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchRecord> run_bench(const BenchSpec& spec, std::ostream* progress) {
  spec.validate();
  std::vector<BenchRecord> records;
  for (const std::size_t n : spec.sizes) {
    const auto data = generate_cloud(n, spec.seed);
    const auto queries = generate_queries(n, spec.seed);

    auto run = [&](const RunKey& key) {
      auto rec = time_run(key, data, queries, spec);
      if (progress != nullptr) {
        *progress << "n=" << n << ' ' << to_string(key) << ' ';
        if (rec.available) {
          *progress << "median " << rec.median_s << " s\n";
        } else {
          *progress << "n/a\n";
        }
        progress->flush();
      }
      records.push_back(std::move(rec));
    };

    bool baseline_in_grid = false;
    std::vector<RunKey> grid;
    for (auto precision : spec.precisions) {
      for (auto strategy : spec.strategies) {
        if (strategy == Strategy::kSeq) {
          grid.push_back({std::nullopt, strategy, precision});
        } else {
          for (auto layout : spec.layouts) grid.push_back({layout, strategy, precision});
        }
      }
    }
    for (const auto& key : grid) baseline_in_grid = baseline_in_grid || key == spec.baseline;
    if (!baseline_in_grid) run(spec.baseline);
    for (const auto& key : grid) run(key);
  }

  const auto rows = speedup_table(records, spec.baseline);
  std::size_t next = 0;
  for (auto& r : records) {
    if (r.available) r.speedup = rows[next++].speedup;
  }
  return records;
}

void write_report_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "layout,strategy,precision,n,p,median_s,min_s,speedup,checksum\n";
  for (const auto& r : records) {
    out << (r.key.layout ? to_string(*r.key.layout) : std::string_view("none")) << ','
        << to_string(r.key.strategy) << ',' << to_string(r.key.precision) << ',' << r.n << ','
        << format_double(r.p) << ',';
    if (!r.available) {
      out << "n/a,n/a,n/a,n/a\n";
      continue;
    }
    out << format_double(r.median_s) << ',' << format_double(r.min_s) << ','
        << format_double(r.speedup) << ',' << format_double(r.checksum) << '\n';
  }
}

void write_report_markdown(std::ostream& out, std::span<const BenchRecord> records) {
  out << "# IDW layout benchmark\n\n";
  out << "| layout | strategy | precision | n | p | median (s) | min (s) | speedup | checksum |\n";
  out << "|---|---|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : records) {
    out << "| " << (r.key.layout ? to_string(*r.key.layout) : std::string_view("none")) << " | "
        << to_string(r.key.strategy) << " | " << to_string(r.key.precision) << " | " << r.n
        << " | " << format_double(r.p) << " | ";
    if (!r.available) {
      out << "n/a | n/a | n/a | n/a |\n";
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.6f | %.6f | %.2fx | %.10g |\n", r.median_s, r.min_s,
                  r.speedup, r.checksum);
    out << buf;
  }

  // Fastest / slowest layout per (strategy, precision, n).
  struct Group {
    Strategy strategy;
    Precision precision;
    std::size_t n;
    auto operator<=>(const Group&) const = default;
  };
  std::map<Group, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) {
    if (r.available && r.key.layout) {
      groups[{r.key.strategy, r.key.precision, r.n}].push_back(&r);
    }
  }
  out << "\n## Relative layout ordering (hardware-dependent observation)\n\n";
  out << "Orderings below reflect this machine only; they are reported, not checked.\n\n";
  for (const auto& [g, rs] : groups) {
    std::vector<const BenchRecord*> sorted = rs;
    std::stable_sort(sorted.begin(), sorted.end(), [](const BenchRecord* a, const BenchRecord* b) {
      return a->median_s < b->median_s;
    });
    out << "- " << to_string(g.strategy) << ", " << to_string(g.precision) << ", n=" << g.n
        << ": ";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i > 0) out << " < ";
      out << to_string(*sorted[i]->key.layout);
    }
    out << " (fastest: " << to_string(*sorted.front()->key.layout) << ")\n";
  }
}

void emit_report(std::span<const BenchRecord> records, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  if (format == ReportFormat::kCsv) {
    write_report_csv(out, records);
  } else {
    write_report_markdown(out, records);
  }
  out.flush();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

namespace {

double parse_field(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw usage_error("malformed report field '" + s + "'");
  return v;
}

}  // namespace

std::vector<BenchRecord> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "layout,strategy,precision,n,p,median_s,min_s,speedup,checksum") {
    throw usage_error("not a benchmark report CSV");
  }
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw usage_error("malformed report row: " + line);
    BenchRecord r;
    if (f[0] != "none") r.key.layout = parse_layout(f[0]);
    r.key.strategy = parse_strategy(f[1]);
    r.key.precision = parse_precision(f[2]);
    r.n = static_cast<std::size_t>(std::stoull(f[3]));
    r.p = parse_field(f[4]);
    if (f[5] == "n/a") {
      r.available = false;
    } else {
      r.median_s = parse_field(f[5]);
      r.min_s = parse_field(f[6]);
      r.speedup = parse_field(f[7]);
      r.checksum = parse_field(f[8]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t parse_size(std::string_view text) {
  if (text.empty()) throw usage_error("empty size");
  std::size_t mult = 1;
  if (text.back() == 'k' || text.back() == 'K') {
    mult = kSizeUnit;
    text.remove_suffix(1);
  }
  std::size_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw usage_error("invalid size '" + std::string(text) + "'");
  }
  return value * mult;
}

}  // namespace idw
