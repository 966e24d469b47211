#include "qcm/mask.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qcm {

namespace {

std::uint32_t spread16(std::uint32_t v) {
  v &= 0xffffu;
  v = (v | (v << 8)) & 0x00ff00ffu;
  v = (v | (v << 4)) & 0x0f0f0f0fu;
  v = (v | (v << 2)) & 0x33333333u;
  v = (v | (v << 1)) & 0x55555555u;
  return v;
}

std::uint32_t squash16(std::uint32_t v) {
  v &= 0x55555555u;
  v = (v | (v >> 1)) & 0x33333333u;
  v = (v | (v >> 2)) & 0x0f0f0f0fu;
  v = (v | (v >> 4)) & 0x00ff00ffu;
  v = (v | (v >> 8)) & 0x0000ffffu;
  return v;
}

void check_level(int level) {
  if (level < 0 || level > kMaxMaskLevel)
    throw std::invalid_argument("mask level must be in [0, " +
                                std::to_string(kMaxMaskLevel) + "]");
}

}  // namespace

std::uint32_t morton_encode(std::uint32_t ix, std::uint32_t iy) {
  return spread16(ix) | (spread16(iy) << 1);
}

std::array<std::uint32_t, 2> morton_decode(std::uint32_t code) {
  return {squash16(code), squash16(code >> 1)};
}

CompactMask::CompactMask(int level,
                         std::span<const std::array<std::uint32_t, 2>> pixels)
    : level_(level) {
  check_level(level);
  std::uint32_t n = 1u << level;
  codes_.reserve(pixels.size());
  for (auto [ix, iy] : pixels) {
    if (ix >= n || iy >= n)
      throw std::invalid_argument("mask pixel out of range for level");
    codes_.push_back(morton_encode(ix, iy));
  }
  std::sort(codes_.begin(), codes_.end());
  codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
}

CompactMask CompactMask::full(int level) {
  check_level(level);
  if (level > 12)
    throw std::invalid_argument("full mask above level 12 refused (memory)");
  CompactMask m;
  m.level_ = level;
  std::uint64_t total = 1ull << (2 * level);
  m.codes_.resize(total);
  for (std::uint64_t c = 0; c < total; ++c) m.codes_[c] = (std::uint32_t)c;
  return m;
}

CompactMask CompactMask::from_codes(int level, std::vector<std::uint32_t> codes) {
  check_level(level);
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  if (!codes.empty() && level < 16 && codes.back() >= (1u << (2 * level)))
    throw std::invalid_argument("mask code out of range for level");
  CompactMask m;
  m.level_ = level;
  m.codes_ = std::move(codes);
  return m;
}

bool CompactMask::contains(std::uint32_t ix, std::uint32_t iy) const {
  return std::binary_search(codes_.begin(), codes_.end(), morton_encode(ix, iy));
}

std::array<std::uint32_t, 2> CompactMask::pixel(std::size_t i) const {
  return morton_decode(codes_[i]);
}

CompactMask CompactMask::coarsened(int new_level) const {
  if (new_level > level_ || new_level < 0)
    throw std::invalid_argument("coarsened: new level must be in [0, level]");
  int shift = 2 * (level_ - new_level);
  std::vector<std::uint32_t> out;
  out.reserve(codes_.size());
  for (std::uint32_t c : codes_) {
    std::uint32_t p = c >> shift;
    if (out.empty() || out.back() != p) out.push_back(p);
  }
  return from_codes(new_level, std::move(out));
}

Square CompactMask::bounding_square() const {
  if (codes_.empty())
    throw std::invalid_argument("bounding_square: empty mask");
  std::uint32_t xlo = ~0u, xhi = 0, ylo = ~0u, yhi = 0;
  for (std::uint32_t c : codes_) {
    auto [ix, iy] = morton_decode(c);
    xlo = std::min(xlo, ix);
    xhi = std::max(xhi, ix);
    ylo = std::min(ylo, iy);
    yhi = std::max(yhi, iy);
  }
  double s = pixel_side();
  double w = (xhi + 1 - xlo) * s, h = (yhi + 1 - ylo) * s;
  double side = std::max(w, h);
  return {{xlo * s + 0.5 * w, ylo * s + 0.5 * h}, side};
}

}  // namespace qcm
