#include "idw/layout_store.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace idw {

static_assert(std::endian::native == std::endian::little,
              "dump format assumes a little-endian host");

std::string_view to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::kSoA: return "soa";
    case LayoutKind::kAoS: return "aos";
    case LayoutKind::kAoaS: return "aoas";
    case LayoutKind::kSoAoS: return "soaos";
    case LayoutKind::kHybrid: return "hybrid";
  }
  return "?";
}

LayoutKind parse_layout(std::string_view text) {
  std::string lower(text);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (auto kind : kAllLayouts) {
    if (lower == to_string(kind)) return kind;
  }
  throw usage_error("unknown layout '" + std::string(text) + "'");
}

bool is_legal(LayoutKind kind, Precision precision) noexcept {
  if (kind == LayoutKind::kSoAoS || kind == LayoutKind::kHybrid) {
    return precision == Precision::kDouble;
  }
  return true;
}

void require_legal(LayoutKind kind, Precision precision) {
  if (!is_legal(kind, precision)) throw usage_error("layout requires double precision");
}

ComponentSet parse_components(std::string_view text) {
  if (text == "all") return ComponentSet::all();
  ComponentSet set;
  for (char ch : text) {
    switch (ch) {
      case 'x': case 'X': set = set.with(Component::kX); break;
      case 'y': case 'Y': set = set.with(Component::kY); break;
      case 'z': case 'Z': set = set.with(Component::kZ); break;
      case ',': case ' ': case '{': case '}': break;
      default: throw usage_error("unknown component '" + std::string(1, ch) + "'");
    }
  }
  if (set.empty()) throw usage_error("empty component set");
  return set;
}

std::string to_string(ComponentSet set) {
  std::string out;
  if (set.contains(Component::kX)) out += 'x';
  if (set.contains(Component::kY)) out += 'y';
  if (set.contains(Component::kZ)) out += 'z';
  return out;
}

std::size_t LayoutShape::bytes_per_point() const {
  std::size_t total = 0;
  for (std::size_t b = 0; b < buffer_count; ++b) total += record_bytes[b];
  return total;
}

LayoutShape layout_shape(LayoutKind kind, Precision precision) {
  require_legal(kind, precision);
  const std::size_t e = element_size(precision);
  LayoutShape s;
  s.element_bytes = e;
  switch (kind) {
    case LayoutKind::kSoA:
      s.buffer_count = 3;
      s.record_bytes = {e, e, e};
      s.placement = {{{0, 0}, {1, 0}, {2, 0}}};
      break;
    case LayoutKind::kAoS:
      s.buffer_count = 1;
      s.record_bytes = {3 * e, 0, 0};
      s.placement = {{{0, 0}, {0, e}, {0, 2 * e}}};
      break;
    case LayoutKind::kAoaS:
      s.buffer_count = 1;
      s.record_bytes = {4 * e, 0, 0};
      s.placement = {{{0, 0}, {0, e}, {0, 2 * e}}};
      s.pads = {{0, 3 * e, e}};
      break;
    case LayoutKind::kSoAoS:
      s.buffer_count = 2;
      s.record_bytes = {2 * e, 2 * e, 0};
      s.placement = {{{0, 0}, {0, e}, {1, 0}}};
      s.pads = {{1, e, e}};
      break;
    case LayoutKind::kHybrid:
      s.buffer_count = 2;
      s.record_bytes = {2 * e, e, 0};
      s.placement = {{{0, 0}, {0, e}, {1, 0}}};
      break;
  }
  return s;
}

void LayoutStore::FreeDeleter::operator()(std::byte* p) const noexcept { std::free(p); }

LayoutStore::LayoutStore(LayoutKind kind, Precision precision, std::size_t count)
    : kind_(kind),
      precision_(precision),
      count_(count),
      shape_(layout_shape(kind, precision)),
      counters_(std::make_unique<Counters>()) {
  if (count == 0) throw usage_error("no data points");
  for (std::size_t b = 0; b < shape_.buffer_count; ++b) {
    const std::size_t bytes = buffer_bytes(b);
    const std::size_t padded = (bytes + kBufferAlignment - 1) / kBufferAlignment * kBufferAlignment;
    auto* raw = static_cast<std::byte*>(std::aligned_alloc(kBufferAlignment, padded));
    if (raw == nullptr) throw std::bad_alloc();
    std::memset(raw, 0, padded);
    buffers_[b].reset(raw);
  }
}

template <class T>
void LayoutStore::fill(std::span<const PointRecord> records) {
  for (auto c : {Component::kX, Component::kY, Component::kZ}) {
    const auto& pl = shape_.at(c);
    std::byte* base = buffers_[pl.buffer].get() + pl.offset_bytes;
    const std::size_t stride = shape_.record_bytes[pl.buffer];
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double v = c == Component::kX ? records[i].x
                       : c == Component::kY ? records[i].y
                                            : records[i].z;
      const T value = static_cast<T>(v);
      std::memcpy(base + i * stride, &value, sizeof(T));
    }
  }
}

LayoutStore LayoutStore::build(std::span<const PointRecord> records, LayoutKind kind,
                               Precision precision) {
  require_legal(kind, precision);
  if (records.empty()) throw usage_error("no data points");
  for (const auto& r : records) {
    if (!is_finite(r)) throw usage_error("invalid coordinate");
  }
  LayoutStore store(kind, precision, records.size());
  if (precision == Precision::kSingle) {
    store.fill<float>(records);
  } else {
    store.fill<double>(records);
  }
  return store;
}

LayoutStore LayoutStore::from_buffers(LayoutKind kind, Precision precision, std::size_t count,
                                      std::vector<std::vector<std::byte>> buffers) {
  require_legal(kind, precision);
  LayoutStore store(kind, precision, count);
  if (buffers.size() != store.shape_.buffer_count) throw usage_error("buffer count mismatch");
  for (std::size_t b = 0; b < buffers.size(); ++b) {
    if (buffers[b].size() != store.buffer_bytes(b)) throw usage_error("buffer size mismatch");
    std::memcpy(store.buffers_[b].get(), buffers[b].data(), buffers[b].size());
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!is_finite(store.peek(i))) throw usage_error("invalid coordinate");
  }
  return store;
}

template <class T>
T LayoutStore::element(Component c, std::size_t i) const {
  const auto& pl = shape_.at(c);
  T value;
  std::memcpy(&value,
              buffers_[pl.buffer].get() + i * shape_.record_bytes[pl.buffer] + pl.offset_bytes,
              sizeof(T));
  return value;
}

void LayoutStore::check_index(std::size_t i) const {
  if (i >= count_) throw usage_error("index out of bounds");
}

PointRecord LayoutStore::peek(std::size_t i) const {
  check_index(i);
  if (precision_ == Precision::kSingle) {
    return {element<float>(Component::kX, i), element<float>(Component::kY, i),
            element<float>(Component::kZ, i)};
  }
  return {element<double>(Component::kX, i), element<double>(Component::kY, i),
          element<double>(Component::kZ, i)};
}

PointRecord LayoutStore::read_point(std::size_t i) const {
  PointRecord r = peek(i);
  count_reads(ComponentSet::all(), 1);
  return r;
}

ComponentValues LayoutStore::read_components(std::size_t i, ComponentSet which) const {
  if (which.empty()) throw usage_error("empty component set");
  check_index(i);
  ComponentValues out;
  out.which = which;
  auto get = [&](Component c) -> double {
    return precision_ == Precision::kSingle ? element<float>(c, i) : element<double>(c, i);
  };
  if (which.contains(Component::kX)) out.x = get(Component::kX);
  if (which.contains(Component::kY)) out.y = get(Component::kY);
  if (which.contains(Component::kZ)) out.z = get(Component::kZ);
  count_reads(which, 1);
  return out;
}

void LayoutStore::count_reads(ComponentSet which, std::uint64_t n) const noexcept {
  for (std::size_t c = 0; c < 3; ++c) {
    if (which.contains(static_cast<Component>(c))) {
      counters_->reads[c].fetch_add(n, std::memory_order_relaxed);
    }
  }
}

AccessStats LayoutStore::stats() const noexcept {
  AccessStats s;
  s.reads_x = counters_->reads[0].load(std::memory_order_relaxed);
  s.reads_y = counters_->reads[1].load(std::memory_order_relaxed);
  s.reads_z = counters_->reads[2].load(std::memory_order_relaxed);
  s.bytes_touched = s.total_reads() * shape_.element_bytes;
  return s;
}

void LayoutStore::reset_stats() const noexcept {
  for (auto& r : counters_->reads) r.store(0, std::memory_order_relaxed);
}

std::vector<PointRecord> LayoutStore::records() const {
  std::vector<PointRecord> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) out.push_back(peek(i));
  return out;
}

std::span<const std::byte> LayoutStore::buffer(std::size_t b) const {
  if (b >= shape_.buffer_count) throw usage_error("buffer index out of bounds");
  return {buffers_[b].get(), buffer_bytes(b)};
}

std::span<std::byte> LayoutStore::raw_buffer(std::size_t b) {
  if (b >= shape_.buffer_count) throw usage_error("buffer index out of bounds");
  return {buffers_[b].get(), buffer_bytes(b)};
}

LayoutStore convert(const LayoutStore& store, LayoutKind target) {
  require_legal(target, store.precision());
  // peek() widens float to double exactly, so the rebuild below rounds back
  // to the identical float.
  return LayoutStore::build(store.records(), target, store.precision());
}

bool same_values(const LayoutStore& a, const LayoutStore& b) {
  if (a.size() != b.size() || a.precision() != b.precision()) return false;
  const std::size_t e = element_size(a.precision());
  for (auto c : {Component::kX, Component::kY, Component::kZ}) {
    const auto& pa = a.shape().at(c);
    const auto& pb = b.shape().at(c);
    const auto ba = a.buffer(pa.buffer);
    const auto bb = b.buffer(pb.buffer);
    const std::size_t sa = a.shape().record_bytes[pa.buffer];
    const std::size_t sb = b.shape().record_bytes[pb.buffer];
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::memcmp(ba.data() + i * sa + pa.offset_bytes, bb.data() + i * sb + pb.offset_bytes,
                      e) != 0) {
        return false;
      }
    }
  }
  return true;
}

namespace {
constexpr char kMagic[4] = {'I', 'D', 'W', 'L'};
}

void write_dump(std::ostream& out, const LayoutStore& store) {
  out.write(kMagic, 4);
  const auto kind = static_cast<std::uint8_t>(store.kind());
  const auto precision = static_cast<std::uint8_t>(store.precision());
  const std::uint64_t count = store.size();
  out.put(static_cast<char>(kind));
  out.put(static_cast<char>(precision));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (std::size_t b = 0; b < store.buffer_count(); ++b) {
    const auto bytes = store.buffer(b);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw io_error("failed writing layout dump");
}

LayoutStore read_dump(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw io_error("not a layout dump (bad magic)");
  const int kind = in.get();
  const int precision = in.get();
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in) throw io_error("truncated layout dump header");
  if (kind < 0 || kind > 4 || precision < 0 || precision > 1) {
    throw io_error("corrupt layout dump header");
  }
  const auto layout = static_cast<LayoutKind>(kind);
  const auto prec = static_cast<Precision>(precision);
  require_legal(layout, prec);
  if (count == 0) throw usage_error("no data points");
  const auto shape = layout_shape(layout, prec);
  std::vector<std::vector<std::byte>> buffers(shape.buffer_count);
  for (std::size_t b = 0; b < shape.buffer_count; ++b) {
    buffers[b].resize(shape.record_bytes[b] * count);
    in.read(reinterpret_cast<char*>(buffers[b].data()),
            static_cast<std::streamsize>(buffers[b].size()));
    if (!in) throw io_error("truncated layout dump body");
  }
  return LayoutStore::from_buffers(layout, prec, count, std::move(buffers));
}

}  // namespace idw
