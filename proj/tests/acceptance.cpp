// Acceptance suite: one PASS/FAIL line per criterion.
//
//   idw_acceptance [--workdir DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "idw/bench.hpp"
#include "idw/core.hpp"
#include "idw/layout_store.hpp"
#include "idw/strategies.hpp"
#include "idw/txn_model.hpp"
#include "support.hpp"

using namespace idw;

namespace {

constexpr double kTolSingle = 1e-3;
constexpr double kTolDouble = 1e-9;
constexpr double kTolSingleSmall = 1e-4;  // n <= 256
constexpr double kGridBudgetSeconds = 60.0;

double tol(Precision p, std::size_t n) {
  if (p == Precision::kDouble) return kTolDouble;
  return n <= 256 ? kTolSingleSmall : kTolSingle;
}

// Collects failures for one criterion; the first few are echoed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    if (failures_++ < 10) std::cout << "    failed: " << what << '\n';
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  std::size_t checks() const { return checks_; }
  std::size_t failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

std::string combo(LayoutKind k, Strategy s, Precision p) {
  return std::string(to_string(k)) + "/" + std::string(to_string(s)) + "/" +
         std::string(to_string(p));
}

ExecConfig exec(std::size_t g = 1024, std::size_t width = ExecConfig::default_parallel_width(),
                std::size_t tile = 0) {
  ExecConfig cfg;
  cfg.group_size = g;
  cfg.tile_size = tile;
  cfg.parallel_width = width;
  return cfg;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// 1. Oracle equivalence over the full legal grid.
void criterion_oracle_grid(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  double worst_single = 0, worst_double = 0;
  for (std::size_t n : {256u, 1024u, 4096u}) {
    const auto data = generate_cloud(n, 100 + n);
    const auto queries = generate_queries(n, 100 + n);
    const auto want = idw_predict_seq(data, queries, {}, Precision::kDouble);
    for (auto prec : {Precision::kSingle, Precision::kDouble}) {
      for (auto kind : kAllLayouts) {
        if (!is_legal(kind, prec)) continue;
        const auto store = LayoutStore::build(data, kind, prec);
        for (auto s : kParallelStrategies) {
          const double err = test::max_rel_err(run_strategy(s, store, queries, {}, exec()), want);
          (prec == Precision::kSingle ? worst_single : worst_double) =
              std::max(prec == Precision::kSingle ? worst_single : worst_double, err);
          c.expect(err <= tol(prec, n), "n=" + std::to_string(n) + " " + combo(kind, s, prec) +
                                            " rel err " + fmt(err));
        }
      }
      const double seq_err =
          test::max_rel_err(idw_predict_seq(data, queries, {}, prec), want);
      c.expect(seq_err <= tol(prec, n), "n=" + std::to_string(n) + " seq " +
                                            std::string(to_string(prec)));
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < kGridBudgetSeconds, "grid runtime " + fmt(secs) + " s");
  c.note("max rel err single " + fmt(worst_single) + ", double " + fmt(worst_double) +
         ", grid " + fmt(secs) + " s");
}

// 2. Element read counts with G = T = 64, n = m = 1024.
void criterion_read_counts(Check& c) {
  const std::size_t n = 1024, m = 1024, g = 64;
  const auto data = generate_cloud(n, 2);
  const auto queries = generate_queries(m, 2);
  const std::uint64_t full = 3ull * m * n;
  const std::uint64_t tiled = 3ull * ((m + g - 1) / g) * n;
  for (auto prec : {Precision::kSingle, Precision::kDouble}) {
    for (auto kind : kAllLayouts) {
      if (!is_legal(kind, prec)) continue;
      const auto store = LayoutStore::build(data, kind, prec);
      for (auto s : kParallelStrategies) {
        store.reset_stats();
        run_strategy(s, store, queries, {}, exec(g, ExecConfig::default_parallel_width(), g));
        const auto st = store.stats();
        const std::uint64_t expected = s == Strategy::kTiled ? tiled : full;
        c.expect(st.total_reads() == expected && st.reads_x == st.reads_y &&
                     st.reads_y == st.reads_z,
                 combo(kind, s, prec) + " reads " + std::to_string(st.total_reads()) +
                     " expected " + std::to_string(expected));
      }
    }
  }
  // Each of the m/G tiles streams the cloud once, so tiling saves a factor of G.
  c.expect(tiled == 3ull * 16 * n && full / tiled == g, "tile count and reduction factor");
  c.note("naive/nested " + std::to_string(full) + " reads, tiled " + std::to_string(tiled) +
         " over 16 tiles (" + std::to_string(full / tiled) + "x fewer)");
}

// 3. Improved nested variant: 3000 samples over 1024 workers.
void criterion_work_split(Check& c) {
  const std::size_t n = 3000, g = 1024;
  const std::uint32_t trips = static_cast<std::uint32_t>((n + g - 1) / g);
  const auto data = generate_cloud(n, 3);
  const auto queries = generate_queries(16, 3);
  const auto want = idw_predict_seq(data, queries, {}, Precision::kDouble);
  for (auto prec : {Precision::kSingle, Precision::kDouble}) {
    for (auto kind : kAllLayouts) {
      if (!is_legal(kind, prec)) continue;
      const auto store = LayoutStore::build(data, kind, prec);
      StrategyTrace t;
      const auto got = run_nested_improved(store, queries, {}, exec(g), &t);
      const std::string tag = std::string(to_string(kind)) + "/" + std::string(to_string(prec));
      c.expect(t.min_worker_iterations == trips && t.max_worker_iterations == trips,
               tag + " loop trips " + std::to_string(t.min_worker_iterations) + ".." +
                   std::to_string(t.max_worker_iterations));
      c.expect(t.max_worker_points == trips, tag + " max points per worker");
      c.expect(t.total_worker_points == n * queries.size(), tag + " total points");
      c.expect(t.shared_merge_events == 0, tag + " shared merges");
      c.expect(t.tree_reductions == queries.size(), tag + " one reduction per query");
      c.expect(test::max_rel_err(got, want) <= tol(prec, n), tag + " oracle");
    }
  }
  c.note("every worker runs " + std::to_string(trips) +
         " strided iterations; 0 shared-accumulator merges");
}

// Independent address enumeration for criterion 4.
TransactionReport enumerate_bytes(const AccessPattern& p) {
  const std::size_t e = p.precision == Precision::kSingle ? 4 : 8;
  struct F {
    std::size_t buf, off, stride;
  };
  std::array<F, 3> f{};
  switch (p.layout) {
    case LayoutKind::kSoA: f = {{{0, 0, e}, {1, 0, e}, {2, 0, e}}}; break;
    case LayoutKind::kAoS: f = {{{0, 0, 3 * e}, {0, e, 3 * e}, {0, 2 * e, 3 * e}}}; break;
    case LayoutKind::kAoaS: f = {{{0, 0, 4 * e}, {0, e, 4 * e}, {0, 2 * e, 4 * e}}}; break;
    case LayoutKind::kSoAoS: f = {{{0, 0, 16}, {0, 8, 16}, {1, 0, 16}}}; break;
    case LayoutKind::kHybrid: f = {{{0, 0, 16}, {0, 8, 16}, {1, 0, 8}}}; break;
  }
  std::set<std::pair<std::size_t, std::size_t>> segs;
  std::uint64_t useful = 0;
  for (std::size_t lane = 0; lane < p.warp_size; ++lane) {
    for (std::size_t comp = 0; comp < 3; ++comp) {
      if (!p.components.contains(static_cast<Component>(comp))) continue;
      const std::size_t addr = (p.base_offset + lane) * f[comp].stride + f[comp].off;
      for (std::size_t b = 0; b < e; ++b) segs.insert({f[comp].buf, (addr + b) / p.segment_bytes});
      useful += e;
    }
  }
  TransactionReport r;
  r.segments = segs.size();
  r.useful_bytes = useful;
  r.fetched_bytes = r.segments * p.segment_bytes;
  r.utilization = static_cast<double>(useful) / static_cast<double>(r.fetched_bytes);
  return r;
}

// 4. Transaction model.
void criterion_transactions(Check& c) {
  const AccessPattern aos{LayoutKind::kAoS, Precision::kSingle, ComponentSet::of(Component::kX),
                          32, 128, 0};
  AccessPattern soa = aos;
  soa.layout = LayoutKind::kSoA;
  const auto ra = count_transactions(aos);
  const auto rs = count_transactions(soa);
  c.expect(ra.utilization == 1.0 / 3.0, "AoS utilization " + fmt(ra.utilization));
  c.expect(ra.segments == 3, "AoS segments");
  c.expect(rs.utilization == 1.0, "SoA utilization " + fmt(rs.utilization));
  c.expect(ra == enumerate_bytes(aos) && rs == enumerate_bytes(soa), "examples vs oracle");

  std::mt19937_64 rng(4);
  std::size_t mismatches = 0, patterns = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto kind = kAllLayouts[rng() % 5];
    const auto prec = is_legal(kind, Precision::kSingle) && rng() % 2 == 0 ? Precision::kSingle
                                                                          : Precision::kDouble;
    const std::size_t w = 1 + rng() % 64;
    const std::size_t n = 4096;
    const AccessPattern p{kind, prec, ComponentSet(static_cast<std::uint8_t>(1 + rng() % 7)), w,
                          std::size_t{32} << (rng() % 5), rng() % (n - w + 1)};
    ++patterns;
    if (!(count_transactions(p) == enumerate_bytes(p))) ++mismatches;
  }
  c.expect(patterns >= 1000 && mismatches == 0,
           std::to_string(mismatches) + " mismatches in " + std::to_string(patterns));
  c.note("AoS/single/{x} utilization " + fmt(ra.utilization) + ", SoA " + fmt(rs.utilization) +
         "; " + std::to_string(patterns) + " random patterns, " + std::to_string(mismatches) +
         " mismatches");
}

// 5. Layout integrity.
void criterion_layouts(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<PointRecord> recs(10000);
  for (auto& r : recs) r = {u(rng), u(rng), u(rng)};

  std::size_t pairs = 0;
  for (auto prec : {Precision::kSingle, Precision::kDouble}) {
    for (auto a : kAllLayouts) {
      if (!is_legal(a, prec)) continue;
      const auto src = LayoutStore::build(recs, a, prec);
      for (auto b : kAllLayouts) {
        if (!is_legal(b, prec)) continue;
        const auto there = convert(src, b);
        const auto back = convert(there, a);
        bool exact = same_values(src, back) && same_values(src, there);
        for (std::size_t i = 0; exact && i < recs.size(); ++i) {
          exact = there.peek(i) == src.peek(i);
        }
        c.expect(exact, std::string(to_string(a)) + "->" + std::string(to_string(b)) + " " +
                            std::string(to_string(prec)));
        ++pairs;
      }
    }
  }
  const auto d = LayoutStore::build(recs, LayoutKind::kSoA, Precision::kDouble);
  c.expect(d.records() == recs, "double values stored exactly");

  const std::vector<std::tuple<LayoutKind, Precision, std::vector<std::size_t>>> strides = {
      {LayoutKind::kAoS, Precision::kSingle, {12}},  {LayoutKind::kAoS, Precision::kDouble, {24}},
      {LayoutKind::kAoaS, Precision::kSingle, {16}}, {LayoutKind::kAoaS, Precision::kDouble, {32}},
      {LayoutKind::kSoAoS, Precision::kDouble, {16, 16}},
      {LayoutKind::kHybrid, Precision::kDouble, {16, 8}}};
  for (const auto& [kind, prec, want] : strides) {
    const auto s = LayoutStore::build(recs, kind, prec);
    bool ok = s.buffer_count() == want.size();
    for (std::size_t b = 0; ok && b < want.size(); ++b) {
      ok = s.shape().record_bytes[b] == want[b] && s.buffer(b).size() == want[b] * recs.size();
    }
    c.expect(ok, "stride " + std::string(to_string(kind)) + "/" + std::string(to_string(prec)));
  }

  // Pad fuzzing: random pad bytes change no strategy output.
  const auto small = generate_cloud(1500, 55);
  const auto queries = generate_queries(200, 55);
  for (auto [kind, prec] : {std::pair{LayoutKind::kAoaS, Precision::kSingle},
                            std::pair{LayoutKind::kAoaS, Precision::kDouble},
                            std::pair{LayoutKind::kSoAoS, Precision::kDouble}}) {
    const auto clean = LayoutStore::build(small, kind, prec);
    for (int round = 0; round < 3; ++round) {
      auto fuzzed = LayoutStore::build(small, kind, prec);
      for (const auto& pad : fuzzed.shape().pads) {
        auto buf = fuzzed.raw_buffer(pad.buffer);
        const std::size_t stride = fuzzed.shape().record_bytes[pad.buffer];
        for (std::size_t i = 0; i < small.size(); ++i) {
          for (std::size_t k = 0; k < pad.size_bytes; ++k) {
            buf[i * stride + pad.offset_bytes + k] = static_cast<std::byte>(rng());
          }
        }
      }
      for (auto s : kParallelStrategies) {
        const auto a = run_strategy(s, clean, queries, {}, exec(256));
        const auto b = run_strategy(s, fuzzed, queries, {}, exec(256));
        c.expect(test::bit_equal(a, b), "pad fuzz " + combo(kind, s, prec));
      }
      c.expect(fuzzed.records() == clean.records(), "pad fuzz records");
    }
  }
  c.note(std::to_string(pairs) + " conversion pairs over 10000 records; 6 stride shapes; pads fuzzed");
}

std::string strip_time_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) return "malformed";
    out << f[0] << ',' << f[1] << ',' << f[2] << ',' << f[3] << ',' << f[4] << ',' << f[8] << '\n';
  }
  return out.str();
}

// 6. Determinism.
void criterion_determinism(Check& c, const std::filesystem::path& dir) {
  BenchSpec spec;
  spec.sizes = {256, 1000};
  spec.repeats = 2;
  spec.warmup = 0;
  spec.seed = 6;
  std::string reports[2];
  for (int i = 0; i < 2; ++i) {
    const auto path = dir / ("determinism_" + std::to_string(i) + ".csv");
    emit_report(run_bench(spec), ReportFormat::kCsv, path);
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    reports[i] = s.str();
  }
  c.expect(strip_time_columns(reports[0]) == strip_time_columns(reports[1]) &&
               strip_time_columns(reports[0]) != "malformed",
           "reports differ outside time columns");

  const auto data = generate_cloud(2500, 66);
  const auto queries = generate_queries(300, 66);
  for (auto prec : {Precision::kSingle, Precision::kDouble}) {
    for (auto kind : kAllLayouts) {
      if (!is_legal(kind, prec)) continue;
      const auto store = LayoutStore::build(data, kind, prec);
      for (auto s : kParallelStrategies) {
        const auto ref = run_strategy(s, store, queries, {}, exec(1024, 1));
        for (std::size_t width : {2u, 8u}) {
          c.expect(test::bit_equal(run_strategy(s, store, queries, {}, exec(1024, width)), ref),
                   combo(kind, s, prec) + " width " + std::to_string(width));
        }
      }
    }
  }
  c.note("reports identical outside median_s/min_s/speedup; predictions bit-identical at widths 1, 2, 8");
}

// 7. Default benchmark grid.
void criterion_default_grid(Check& c, const std::filesystem::path& dir) {
  const BenchSpec spec;  // defaults: 10K, 50K, 100K; all legal combos; R = 5
  c.expect(spec.repeats == 5 && spec.sizes.size() == 3 && spec.sizes[0] == 10 * kSizeUnit &&
               spec.sizes[1] == 50 * kSizeUnit && spec.sizes[2] == 100 * kSizeUnit,
           "default spec");
  const auto start = std::chrono::steady_clock::now();
  std::ofstream log(dir / "default_grid.log");
  const auto records = run_bench(spec, &log);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto csv_path = dir / "default_grid.csv";
  const auto md_path = dir / "default_grid.md";
  emit_report(records, ReportFormat::kCsv, csv_path);
  emit_report(records, ReportFormat::kMarkdown, md_path);

  std::ifstream in(csv_path);
  std::vector<BenchRecord> back;
  try {
    back = read_report_csv(in);
  } catch (const std::exception& e) {
    c.expect(false, std::string("CSV does not parse: ") + e.what());
  }
  const std::size_t per_size = 1 + kAllLayouts.size() * kParallelStrategies.size() * 2;
  c.expect(back.size() == 3 * per_size, "row count " + std::to_string(back.size()));
  std::size_t na = 0;
  for (const auto& r : back) {
    if (!r.available) {
      ++na;
      c.expect(r.key.layout && !is_legal(*r.key.layout, r.key.precision), "unexpected n/a row");
      continue;
    }
    c.expect(std::isfinite(r.median_s) && r.median_s > 0 && r.min_s <= r.median_s &&
                 r.speedup > 0 && std::isfinite(r.checksum),
             "row " + to_string(r.key) + " n=" + std::to_string(r.n));
  }
  c.expect(na == 3 * 2 * kParallelStrategies.size(), "n/a rows " + std::to_string(na));
  for (const auto& r : records) c.expect(!r.available || r.times.size() == 5, "5 samples");

  // Orderings are printed for the record and never checked.
  std::ifstream md(md_path);
  std::string line;
  bool in_obs = false;
  while (std::getline(md, line)) {
    if (line.find("hardware-dependent observation") != std::string::npos) in_obs = true;
    if (in_obs && line.rfind("- ", 0) == 0) c.note("observation " + line.substr(2));
  }
  c.note("default grid finished in " + fmt(secs) + " s; " + std::to_string(back.size()) +
         " rows (" + std::to_string(na) + " n/a) in " + csv_path.string());
}

// 8. Coincidence, single-sample cloud, remainder tiles.
void criterion_edges(Check& c) {
  auto data = generate_cloud(1500, 8);
  const auto queries = generate_queries(40, 8);
  data[1400] = {queries[3].x, queries[3].y, 11.0};
  data[700] = {queries[3].x, queries[3].y, 22.0};
  data[1023] = {queries[7].x, queries[7].y, 33.0};
  data[1024] = {queries[7].x, queries[7].y, 44.0};
  const std::vector<PointRecord> one{{0.25, 0.75, 42.0}};
  const auto rem_data = generate_cloud(1001, 9);  // 1001 = 7 * 143, no power of two divides it
  const auto rem_queries = generate_queries(77, 9);
  const auto rem_want = idw_predict_seq(rem_data, rem_queries, {}, Precision::kDouble);

  for (auto prec : {Precision::kSingle, Precision::kDouble}) {
    for (auto kind : kAllLayouts) {
      if (!is_legal(kind, prec)) continue;
      const auto store = LayoutStore::build(data, kind, prec);
      const auto single = LayoutStore::build(one, kind, prec);
      const auto rem = LayoutStore::build(rem_data, kind, prec);
      for (auto s : kParallelStrategies) {
        const std::string tag = combo(kind, s, prec);
        for (std::size_t g : {1u, 64u, 1024u}) {
          const auto got = run_strategy(s, store, queries, {}, exec(g, 3, 100));
          c.expect(got[3] == 22.0 && got[7] == 33.0, tag + " coincidence G=" + std::to_string(g));
        }
        const auto lone = run_strategy(s, single, queries, {}, exec());
        c.expect(std::all_of(lone.begin(), lone.end(),
                             [&](double v) { return std::abs(v - 42.0) <= 42.0 * tol(prec, 1); }),
                 tag + " single sample");
        for (auto [g, t] : {std::pair<std::size_t, std::size_t>{64, 48}, {100, 7}, {1024, 1000},
                            {30, 0}}) {
          const double err =
              test::max_rel_err(run_strategy(s, rem, rem_queries, {}, exec(g, 2, t)), rem_want);
          c.expect(err <= tol(prec, rem_data.size()),
                   tag + " remainder G=" + std::to_string(g) + " T=" + std::to_string(t));
        }
      }
    }
  }
  c.note("coincident queries return the lowest-index sample; 1-point clouds; n=1001 remainders");
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path workdir = std::filesystem::current_path() / "acceptance_out";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: idw_acceptance [--workdir DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  std::filesystem::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"oracle equivalence grid", criterion_oracle_grid},
      {"read-count law", criterion_read_counts},
      {"improved-nested work split", criterion_work_split},
      {"transaction model", criterion_transactions},
      {"layout integrity", criterion_layouts},
      {"determinism", [&](Check& c) { criterion_determinism(c, workdir); }},
      {"desk-scale benchmark", [&](Check& c) { criterion_default_grid(c, workdir); }},
      {"coincidence and edge cases", criterion_edges},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& n : c.notes()) std::cout << "    " << n << '\n';
    std::cout << (c.ok() ? "PASS" : "FAIL") << "  criterion " << id << ": " << criteria[i].first
              << " (" << c.checks() << " checks, " << c.failures() << " failed, " << fmt(secs)
              << " s)" << std::endl;
    if (!c.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
