#include "idw/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "idw/bench.hpp"
#include "idw/layout_store.hpp"
#include "idw/point_io.hpp"
#include "idw/strategies.hpp"
#include "idw/txn_model.hpp"

namespace idw::cli {
namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Config-file keys become "--key value" arguments unless the flag is already
// on the command line; command-line flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw usage_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw usage_error("config '" + path + "' must be a JSON object");

  auto given = [&](const std::string& flag) {
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : cfg.items()) {
    std::string flag = "--" + key;
    for (auto& ch : flag) ch = ch == '_' ? '-' : ch;
    if (given(flag)) continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!text.empty()) text += ',';
        text += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else {
      text = value.dump();
    }
    args.push_back(flag);
    args.push_back(text);
  }
  return args;
}

std::size_t parallel_width_from_env() {
  const char* env = std::getenv("IDW_THREADS");
  if (env == nullptr || *env == '\0') return ExecConfig::default_parallel_width();
  try {
    std::size_t used = 0;
    const long long v = std::stoll(env, &used);
    if (used == std::string(env).size() && v >= 1) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw usage_error("IDW_THREADS must be a positive integer");
}

// Writes through `sink` to a file, or to `out` when the path is "-".
template <class Fn>
void write_output(const std::string& path, std::ostream& out, Fn&& sink) {
  if (path == "-") {
    sink(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw io_error("cannot open '" + path + "' for writing");
  sink(file);
  file.flush();
  if (!file) throw io_error("failed writing '" + path + "'");
}

void print_config(std::ostream& err, const std::string& command, const json& cfg) {
  json doc{{"command", command}, {"config", cfg}};
  err << "# resolved configuration: " << doc.dump() << '\n';
}

json exec_json(const ExecConfig& e) {
  return {{"group_size", e.group_size},
          {"tile_size", e.effective_tile_size()},
          {"parallel_width", e.parallel_width},
          {"deterministic_reduction", e.deterministic_reduction},
          {"simd", std::string(kernels::to_string(e.isa))}};
}

struct GenOptions {
  std::string n;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::string layout = "soa";
  std::string precision = "double";
};

struct RunOptions {
  std::string data, queries, out = "-";
  std::string layout = "soa", strategy = "naive", precision = "double", simd = "auto";
  double p = 2.0;
  double zero_eps = 0.0;
  std::size_t group_size = 1024;
  std::size_t tile_size = 0;
  bool deterministic = true;
};

struct BenchOptions {
  std::string sizes = "10k,50k,100k";
  std::string layouts = "all", strategies = "all", precisions = "all";
  std::size_t repeats = 5, warmup = 1;
  std::uint64_t seed = 1;
  double p = 2.0;
  std::size_t group_size = 1024, tile_size = 0;
  std::string simd = "auto";
  std::string out = "bench.csv";
  std::string report;
};

struct AnalyzeOptions {
  std::string layout = "all", precision = "single", components = "x", out = "-";
  std::size_t warp = 32, segment = 128, offset = 0;
};

struct ConvertOptions {
  std::string in, from, to, precision, out;
};

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  const std::size_t n = parse_size(o.n);
  const auto format = o.format;
  if (format != "csv" && format != "bin") throw usage_error("format must be csv or bin");
  const auto layout = parse_layout(o.layout);
  const auto precision = parse_precision(o.precision);
  if (format == "bin") require_legal(layout, precision);
  print_config(err, "gen",
               {{"n", n}, {"seed", o.seed}, {"out", o.out}, {"format", format},
                {"layout", o.layout}, {"precision", o.precision}});
  const auto cloud = generate_cloud(n, o.seed);
  write_output(o.out, out, [&](std::ostream& s) {
    if (format == "csv") {
      write_points_csv(s, cloud);
    } else {
      write_dump(s, LayoutStore::build(cloud, layout, precision));
    }
  });
  return kExitOk;
}

ExecConfig make_exec(std::size_t group_size, std::size_t tile_size, const std::string& simd,
                     bool deterministic) {
  ExecConfig e;
  e.group_size = group_size;
  e.tile_size = tile_size;
  e.parallel_width = parallel_width_from_env();
  e.deterministic_reduction = deterministic;
  e.isa = simd == "auto" ? kernels::default_isa() : kernels::parse_isa(simd);
  if (!kernels::isa_available(e.isa)) throw usage_error("requested SIMD variant not available");
  e.validate();
  return e;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const auto layout = parse_layout(o.layout);
  const auto precision = parse_precision(o.precision);
  const auto strategy = parse_strategy(o.strategy);
  require_legal(layout, precision);
  Params params{o.p, o.zero_eps};
  params.validate();
  const auto exec = make_exec(o.group_size, o.tile_size, o.simd, o.deterministic);
  json cfg{{"data", o.data}, {"queries", o.queries}, {"layout", o.layout},
           {"strategy", std::string(to_string(strategy))}, {"precision", o.precision},
           {"p", o.p}, {"zero_eps", o.zero_eps}, {"out", o.out}, {"exec", exec_json(exec)}};
  print_config(err, "run", cfg);

  const auto data = load_points(o.data);
  const auto queries = to_queries(load_points(o.queries));
  const auto store = LayoutStore::build(data, layout, precision);
  const auto values = run_strategy(strategy, store, queries, params, exec);
  write_output(o.out, out, [&](std::ostream& s) { write_predictions_csv(s, queries, values); });
  return kExitOk;
}

template <class T, class Parse>
std::vector<T> parse_selection(const std::string& text, std::span<const T> all, Parse parse) {
  if (text == "all") return {all.begin(), all.end()};
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse(item));
  if (out.empty()) throw usage_error("empty selection");
  return out;
}

int cmd_bench(const BenchOptions& o, std::ostream&, std::ostream& err) {
  BenchSpec spec;
  spec.sizes.clear();
  for (const auto& s : split_list(o.sizes)) spec.sizes.push_back(parse_size(s));
  spec.layouts = parse_selection<LayoutKind>(o.layouts, kAllLayouts, parse_layout);
  spec.strategies = parse_selection<Strategy>(o.strategies, kParallelStrategies, parse_strategy);
  constexpr std::array<Precision, 2> kPrecisions{Precision::kSingle, Precision::kDouble};
  spec.precisions = parse_selection<Precision>(o.precisions, kPrecisions, parse_precision);
  spec.repeats = o.repeats;
  spec.warmup = o.warmup;
  spec.seed = o.seed;
  spec.params.p = o.p;
  spec.exec = make_exec(o.group_size, o.tile_size, o.simd, true);
  spec.validate();

  json layouts = json::array(), strategies = json::array(), precisions = json::array();
  for (auto l : spec.layouts) layouts.push_back(std::string(to_string(l)));
  for (auto s : spec.strategies) strategies.push_back(std::string(to_string(s)));
  for (auto p : spec.precisions) precisions.push_back(std::string(to_string(p)));
  print_config(err, "bench",
               {{"sizes", spec.sizes}, {"layouts", layouts}, {"strategies", strategies},
                {"precisions", precisions}, {"repeats", spec.repeats}, {"warmup", spec.warmup},
                {"seed", spec.seed}, {"p", spec.params.p},
                {"baseline", to_string(spec.baseline)}, {"out", o.out}, {"report", o.report},
                {"exec", exec_json(spec.exec)}});

  const auto records = run_bench(spec, &err);
  emit_report(records, ReportFormat::kCsv, o.out);
  if (!o.report.empty()) emit_report(records, ReportFormat::kMarkdown, o.report);
  return kExitOk;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const auto precision = parse_precision(o.precision);
  const auto components = parse_components(o.components);
  std::vector<ScorecardRow> rows;
  if (o.layout == "all") {
    rows = layout_scorecard(precision, components, o.warp, o.segment, o.offset);
  } else {
    const auto layout = parse_layout(o.layout);
    AccessPattern pattern{layout, precision, components, o.warp, o.segment, o.offset};
    rows.push_back({layout, precision, components, o.warp, o.segment,
                    count_transactions(pattern)});
  }
  // Validate the pattern parameters even when every row is n/a.
  AccessPattern{LayoutKind::kSoA, precision, components, o.warp, o.segment, o.offset}.validate();
  print_config(err, "analyze",
               {{"layout", o.layout}, {"precision", o.precision},
                {"components", to_string(components)}, {"warp", o.warp},
                {"segment", o.segment}, {"offset", o.offset}, {"out", o.out}});
  write_output(o.out, out, [&](std::ostream& s) { write_scorecard_csv(s, rows); });
  return kExitOk;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int cmd_convert(const ConvertOptions& o, std::ostream& out, std::ostream& err) {
  const auto target = parse_layout(o.to);
  std::optional<LayoutStore> source;
  if (is_dump_file(o.in)) {
    source.emplace(load_dump(o.in));
    if (!o.from.empty() && parse_layout(o.from) != source->kind()) {
      throw usage_error("--from does not match the layout stored in '" + o.in + "'");
    }
    if (!o.precision.empty() && parse_precision(o.precision) != source->precision()) {
      throw usage_error("--precision does not match the precision stored in '" + o.in + "'");
    }
  } else {
    const auto from = o.from.empty() ? LayoutKind::kSoA : parse_layout(o.from);
    const auto precision = o.precision.empty() ? Precision::kDouble : parse_precision(o.precision);
    require_legal(from, precision);
    std::ifstream in(o.in);
    if (!in) throw io_error("cannot open '" + o.in + "' for reading");
    source.emplace(LayoutStore::build(read_points_csv(in), from, precision));
  }
  require_legal(target, source->precision());
  const bool csv_out = ends_with(o.out, ".csv");
  print_config(err, "convert",
               {{"in", o.in}, {"from", std::string(to_string(source->kind()))},
                {"to", o.to}, {"precision", std::string(to_string(source->precision()))},
                {"out", o.out}, {"out_format", csv_out ? "csv" : "bin"}});
  const auto converted = convert(*source, target);
  write_output(o.out, out, [&](std::ostream& s) {
    if (csv_out) {
      write_points_csv(s, converted.records());
    } else {
      write_dump(s, converted);
    }
  });
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layout-parameterized IDW interpolation: generate, run, benchmark, analyze",
               "idwlayout"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a random point cloud");
  g->add_option("--n", gen.n, "Number of points (k/K suffix = x1024)")->required();
  g->add_option("--seed", gen.seed, "64-bit RNG seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output path ('-' for stdout)")->required();
  g->add_option("--format", gen.format, "csv or bin")->capture_default_str();
  g->add_option("--layout", gen.layout, "Layout of a bin dump")->capture_default_str();
  g->add_option("--precision", gen.precision, "Precision of a bin dump")->capture_default_str();
  g->add_option("--config", "JSON file whose keys mirror these flags");

  RunOptions run_opts;
  auto* r = app.add_subcommand("run", "Interpolate queries with one strategy and layout");
  r->add_option("--data", run_opts.data, "Data points (CSV x,y,z or bin dump)")->required();
  r->add_option("--queries", run_opts.queries, "Query points (CSV x,y[,z] or bin dump)")
      ->required();
  r->add_option("--layout", run_opts.layout, "soa, aos, aoas, soaos, hybrid")
      ->capture_default_str();
  r->add_option("--strategy", run_opts.strategy,
                "seq, naive, tiled, nested-original, nested-improved")
      ->capture_default_str();
  r->add_option("--precision", run_opts.precision, "single or double")->capture_default_str();
  r->add_option("--p", run_opts.p, "Power parameter")->capture_default_str();
  r->add_option("--zero-eps", run_opts.zero_eps, "Coincidence threshold on squared distance")
      ->capture_default_str();
  r->add_option("--group-size", run_opts.group_size, "Workers per group")->capture_default_str();
  r->add_option("--tile-size", run_opts.tile_size, "Samples per tile (0 = group size)")
      ->capture_default_str();
  r->add_option("--simd", run_opts.simd, "auto, scalar or avx2")->capture_default_str();
  r->add_option("--deterministic", run_opts.deterministic,
                "Fixed merge order for nested-original")
      ->capture_default_str();
  r->add_option("--out", run_opts.out, "Output CSV x,y,z_pred ('-' for stdout)")
      ->capture_default_str();
  r->add_option("--config", "JSON file whose keys mirror these flags");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Time the layout x strategy x precision grid");
  b->add_option("--sizes", bench.sizes, "Comma-separated sizes (k/K = x1024)")
      ->capture_default_str();
  b->add_option("--layouts", bench.layouts, "'all' or a comma list")->capture_default_str();
  b->add_option("--strategies", bench.strategies, "'all' or a comma list")->capture_default_str();
  b->add_option("--precisions", bench.precisions, "'all' or a comma list")
      ->capture_default_str();
  b->add_option("--repeats", bench.repeats, "Timed runs per configuration")
      ->capture_default_str();
  b->add_option("--warmup", bench.warmup, "Untimed runs before timing")->capture_default_str();
  b->add_option("--seed", bench.seed, "Dataset seed")->capture_default_str();
  b->add_option("--p", bench.p, "Power parameter")->capture_default_str();
  b->add_option("--group-size", bench.group_size, "Workers per group")->capture_default_str();
  b->add_option("--tile-size", bench.tile_size, "Samples per tile (0 = group size)")
      ->capture_default_str();
  b->add_option("--simd", bench.simd, "auto, scalar or avx2")->capture_default_str();
  b->add_option("--out", bench.out, "Report CSV path")->capture_default_str();
  b->add_option("--report", bench.report, "Optional markdown report path");
  b->add_option("--config", "JSON file whose keys mirror these flags");

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "Memory-transaction scorecard for an access pattern");
  a->add_option("--layout", analyze.layout, "'all' or one layout")->capture_default_str();
  a->add_option("--precision", analyze.precision, "single or double")->capture_default_str();
  a->add_option("--components", analyze.components, "Subset of xyz, e.g. x or xz")
      ->capture_default_str();
  a->add_option("--warp", analyze.warp, "Consecutive lanes")->capture_default_str();
  a->add_option("--segment", analyze.segment, "Transaction segment bytes")->capture_default_str();
  a->add_option("--offset", analyze.offset, "Index of the first lane's point")
      ->capture_default_str();
  a->add_option("--out", analyze.out, "Scorecard CSV ('-' for stdout)")->capture_default_str();
  a->add_option("--config", "JSON file whose keys mirror these flags");

  ConvertOptions conv;
  auto* c = app.add_subcommand("convert", "Convert a point file between layouts");
  c->add_option("--in", conv.in, "Input CSV or bin dump")->required();
  c->add_option("--from", conv.from, "Layout of the input (CSV default soa)");
  c->add_option("--to", conv.to, "Target layout")->required();
  c->add_option("--precision", conv.precision, "Precision (CSV input default double)");
  c->add_option("--out", conv.out, "Output path; .csv writes CSV, otherwise a bin dump")
      ->required();
  c->add_option("--config", "JSON file whose keys mirror these flags");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0 and print the relevant subcommand's usage.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kIo ? kExitIo : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out, err);
    if (r->parsed()) return cmd_run(run_opts, out, err);
    if (b->parsed()) return cmd_bench(bench, out, err);
    if (a->parsed()) return cmd_analyze(analyze, out, err);
    if (c->parsed()) return cmd_convert(conv, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::kIo ? kExitIo : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace idw::cli
