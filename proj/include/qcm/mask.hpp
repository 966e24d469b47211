#ifndef QCM_MASK_HPP
#define QCM_MASK_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "qcm/geometry.hpp"

namespace qcm {

// Interleave two 16-bit indices, x in the even bits.
std::uint32_t morton_encode(std::uint32_t ix, std::uint32_t iy);
std::array<std::uint32_t, 2> morton_decode(std::uint32_t code);

// Bilevel raster over the 2^M x 2^M subdivision of the unit square, stored
// as sorted Morton codes of the occupied cells. The sparse representation
// replaces a literal bitset: level 16 alone would be 4*10^9 cells, while the
// sets of interest occupy a vanishing fraction. Semantics are unchanged.
class CompactMask {
 public:
  CompactMask() = default;
  CompactMask(int level, std::span<const std::array<std::uint32_t, 2>> pixels);
  static CompactMask full(int level);
  static CompactMask from_codes(int level, std::vector<std::uint32_t> codes);

  int level() const { return level_; }
  std::size_t count() const { return codes_.size(); }
  bool empty() const { return codes_.empty(); }
  const std::vector<std::uint32_t>& codes() const { return codes_; }

  bool contains(std::uint32_t ix, std::uint32_t iy) const;
  std::array<std::uint32_t, 2> pixel(std::size_t i) const;
  double pixel_side() const { return std::ldexp(1.0, -level_); }

  // Mask at a coarser level whose cells are the ancestors of the occupied
  // cells (the smallest coarse mask whose union covers this one).
  CompactMask coarsened(int new_level) const;

  // Tight axis-parallel bounding square of the occupied cells, in unit-square
  // coordinates. Throws on an empty mask.
  Square bounding_square() const;

  bool operator==(const CompactMask&) const = default;

 private:
  int level_ = 0;
  std::vector<std::uint32_t> codes_;  // sorted, unique
};

// Maximum level accepted anywhere (the level-17 grid would no longer fit the
// 32-bit Morton codes; the practical cap is far lower).
inline constexpr int kMaxMaskLevel = 16;

}  // namespace qcm

#endif
