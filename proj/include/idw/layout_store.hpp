#pragma once
// Point clouds materialized in one of five memory layouts.
//
//   SoA     x[n] | y[n] | z[n]                        stride e, e, e
//   AoS     {x,y,z}[n]  packed, no padding            stride 3e
//   AoaS    {x,y,z,pad}[n]                            stride 4e (16 B single, 32 B double)
//   SoAoS   {x,y}[n] | {z,pad}[n]      double only    stride 16 + 16
//   Hybrid  {x,y}[n] | z[n]            double only    stride 16 + 8
//
// e is the element size (4 single, 8 double). Every buffer base is aligned
// to kBufferAlignment bytes and pad bytes are zero on construction.

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "idw/core.hpp"

namespace idw {

enum class LayoutKind : std::uint8_t { kSoA = 0, kAoS = 1, kAoaS = 2, kSoAoS = 3, kHybrid = 4 };

inline constexpr std::array<LayoutKind, 5> kAllLayouts = {
    LayoutKind::kSoA, LayoutKind::kAoS, LayoutKind::kAoaS, LayoutKind::kSoAoS, LayoutKind::kHybrid};

std::string_view to_string(LayoutKind kind);
LayoutKind parse_layout(std::string_view text);

bool is_legal(LayoutKind kind, Precision precision) noexcept;
// Throws "layout requires double precision" for SoAoS/Hybrid at single.
void require_legal(LayoutKind kind, Precision precision);

inline constexpr std::size_t kBufferAlignment = 64;

constexpr std::size_t element_size(Precision precision) noexcept {
  return precision == Precision::kSingle ? 4 : 8;
}

enum class Component : std::uint8_t { kX = 0, kY = 1, kZ = 2 };

// Non-empty subsets of {x, y, z} as a bit mask.
class ComponentSet {
 public:
  constexpr ComponentSet() = default;
  constexpr explicit ComponentSet(std::uint8_t bits) : bits_(bits & 0x7u) {}
  static constexpr ComponentSet all() { return ComponentSet(0x7u); }
  static constexpr ComponentSet of(Component c) {
    return ComponentSet(static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)));
  }

  constexpr bool contains(Component c) const {
    return (bits_ >> static_cast<unsigned>(c)) & 1u;
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>((bits_ & 1u) + ((bits_ >> 1) & 1u) + ((bits_ >> 2) & 1u));
  }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr ComponentSet with(Component c) const {
    return ComponentSet(static_cast<std::uint8_t>(bits_ | of(c).bits_));
  }

  friend constexpr bool operator==(ComponentSet, ComponentSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

// Accepts "x", "xz", "x,y,z", "all". Empty text is an error.
ComponentSet parse_components(std::string_view text);
std::string to_string(ComponentSet set);

struct ComponentPlacement {
  std::size_t buffer = 0;
  std::size_t offset_bytes = 0;  // within one record of that buffer
};

struct PadRange {
  std::size_t buffer = 0;
  std::size_t offset_bytes = 0;
  std::size_t size_bytes = 0;
};

// Byte-level shape of a layout at a precision.
struct LayoutShape {
  std::size_t element_bytes = 0;
  std::size_t buffer_count = 0;
  std::array<std::size_t, 3> record_bytes{};  // per buffer stride
  std::array<ComponentPlacement, 3> placement{};
  std::vector<PadRange> pads;

  const ComponentPlacement& at(Component c) const { return placement[static_cast<std::size_t>(c)]; }
  std::size_t bytes_per_point() const;
};

LayoutShape layout_shape(LayoutKind kind, Precision precision);

struct AccessStats {
  std::uint64_t reads_x = 0;
  std::uint64_t reads_y = 0;
  std::uint64_t reads_z = 0;
  std::uint64_t bytes_touched = 0;

  std::uint64_t total_reads() const { return reads_x + reads_y + reads_z; }
  friend bool operator==(const AccessStats&, const AccessStats&) = default;
};

// Raw strided access to one component; stride counted in elements.
template <class T>
struct StridedView {
  const T* base = nullptr;
  std::size_t stride = 1;

  T operator[](std::size_t i) const { return base[i * stride]; }
};

struct ComponentValues {
  ComponentSet which;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

class LayoutStore {
 public:
  static LayoutStore build(std::span<const PointRecord> records, LayoutKind kind,
                           Precision precision);
  // Adopts raw buffers (e.g. from a dump). Sizes must match the shape table.
  static LayoutStore from_buffers(LayoutKind kind, Precision precision, std::size_t count,
                                  std::vector<std::vector<std::byte>> buffers);

  LayoutStore(LayoutStore&&) noexcept = default;
  LayoutStore& operator=(LayoutStore&&) noexcept = default;
  LayoutStore(const LayoutStore&) = delete;
  LayoutStore& operator=(const LayoutStore&) = delete;

  LayoutKind kind() const noexcept { return kind_; }
  Precision precision() const noexcept { return precision_; }
  std::size_t size() const noexcept { return count_; }
  const LayoutShape& shape() const noexcept { return shape_; }

  // Counted accessors. Throw "index out of bounds" / "empty component set".
  PointRecord read_point(std::size_t i) const;
  ComponentValues read_components(std::size_t i, ComponentSet which) const;

  // Bulk accounting for strategies that read through raw views; each
  // element read is reported exactly once.
  void count_reads(ComponentSet which, std::uint64_t elements_per_component) const noexcept;
  AccessStats stats() const noexcept;
  void reset_stats() const noexcept;

  // Uncounted, for conversion, export and kernels.
  PointRecord peek(std::size_t i) const;
  std::vector<PointRecord> records() const;
  template <class T>
  StridedView<T> view(Component c) const;

  std::size_t buffer_count() const noexcept { return shape_.buffer_count; }
  std::span<const std::byte> buffer(std::size_t b) const;
  // Mutable raw bytes; used by dump loading and pad fuzzing.
  std::span<std::byte> raw_buffer(std::size_t b);

 private:
  struct FreeDeleter {
    void operator()(std::byte* p) const noexcept;
  };
  using Buffer = std::unique_ptr<std::byte[], FreeDeleter>;
  struct Counters {
    std::array<std::atomic<std::uint64_t>, 3> reads{};
  };

  LayoutStore(LayoutKind kind, Precision precision, std::size_t count);
  std::size_t buffer_bytes(std::size_t b) const noexcept { return shape_.record_bytes[b] * count_; }
  template <class T>
  void fill(std::span<const PointRecord> records);
  template <class T>
  T element(Component c, std::size_t i) const;
  void check_index(std::size_t i) const;

  LayoutKind kind_ = LayoutKind::kSoA;
  Precision precision_ = Precision::kDouble;
  std::size_t count_ = 0;
  LayoutShape shape_;
  std::array<Buffer, 3> buffers_;
  std::unique_ptr<Counters> counters_;
};

template <class T>
StridedView<T> LayoutStore::view(Component c) const {
  const auto& pl = shape_.at(c);
  const auto* base = reinterpret_cast<const T*>(buffers_[pl.buffer].get() + pl.offset_bytes);
  return {base, shape_.record_bytes[pl.buffer] / sizeof(T)};
}

// Value-preserving relayout; stats of the result start at zero.
LayoutStore convert(const LayoutStore& store, LayoutKind target);

// Compares stored element bit patterns, pads excluded.
bool same_values(const LayoutStore& a, const LayoutStore& b);

// Little-endian dump: "IDWL", u8 kind, u8 precision, u64 count, then the
// buffers in shape-table order.
void write_dump(std::ostream& out, const LayoutStore& store);
LayoutStore read_dump(std::istream& in);

}  // namespace idw
