#pragma once
// Point files: CSV with a header row and the binary layout dump.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "idw/core.hpp"
#include "idw/layout_store.hpp"

namespace idw {

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Header `x,y,z`; values written round-trip exact.
void write_points_csv(std::ostream& out, std::span<const PointRecord> records);
// Header must start with `x,y`; a third column (z or anything else) is
// optional and read as z when present.
std::vector<PointRecord> read_points_csv(std::istream& in);

void write_predictions_csv(std::ostream& out, std::span<const QueryPoint> queries,
                           std::span<const double> values);

// Files: a leading "IDWL" magic selects the binary dump, anything else is
// parsed as CSV. I/O failures throw ErrorKind::kIo with the path.
bool is_dump_file(const std::filesystem::path& path);
std::vector<PointRecord> load_points(const std::filesystem::path& path);
LayoutStore load_dump(const std::filesystem::path& path);
void save_points_csv(const std::filesystem::path& path, std::span<const PointRecord> records);
void save_dump(const std::filesystem::path& path, const LayoutStore& store);

}  // namespace idw
