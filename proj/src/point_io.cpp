#include "idw/point_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace idw {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_points_csv(std::ostream& out, std::span<const PointRecord> records) {
  out << "x,y,z\n";
  for (const auto& r : records) {
    out << format_double(r.x) << ',' << format_double(r.y) << ',' << format_double(r.z) << '\n';
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

double parse_number(std::string_view text, std::size_t line_no) {
  double v = 0.0;
  const auto* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  const auto res = std::from_chars(first, text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw usage_error("invalid number '" + std::string(text) + "' on line " +
                      std::to_string(line_no));
  }
  return v;
}

}  // namespace

std::vector<PointRecord> read_points_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  // Header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  const auto header = split(trim(line));
  if (header.size() < 2 || header[0] != "x" || header[1] != "y") {
    throw usage_error("point CSV must start with header x,y[,z]");
  }
  const bool has_z = header.size() >= 3;
  std::vector<PointRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto f = split(body);
    if (f.size() != header.size()) {
      throw usage_error("wrong field count on line " + std::to_string(line_no));
    }
    PointRecord r{parse_number(f[0], line_no), parse_number(f[1], line_no),
                  has_z ? parse_number(f[2], line_no) : 0.0};
    if (!is_finite(r)) throw usage_error("invalid coordinate");
    out.push_back(r);
  }
  return out;
}

void write_predictions_csv(std::ostream& out, std::span<const QueryPoint> queries,
                           std::span<const double> values) {
  out << "x,y,z_pred\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out << format_double(queries[i].x) << ',' << format_double(queries[i].y) << ','
        << format_double(values[i]) << '\n';
  }
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

bool is_dump_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, "IDWL", 4) == 0;
}

std::vector<PointRecord> load_points(const std::filesystem::path& path) {
  if (is_dump_file(path)) return load_dump(path).records();
  auto in = open_in(path);
  return read_points_csv(in);
}

LayoutStore load_dump(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_dump(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_points_csv(const std::filesystem::path& path, std::span<const PointRecord> records) {
  auto out = open_out(path);
  write_points_csv(out, records);
  out.flush();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

void save_dump(const std::filesystem::path& path, const LayoutStore& store) {
  auto out = open_out(path);
  write_dump(out, store);
  out.flush();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

}  // namespace idw
