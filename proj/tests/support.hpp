#ifndef QCM_TESTS_SUPPORT_HPP
#define QCM_TESTS_SUPPORT_HPP

// Oracles and generators shared by the unit tests and the acceptance runner.
// Everything here is deliberately independent of the library's algorithms:
// covers are enumerated or recursed over directly from the definitions, on a
// different mask representation where that matters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qcm/geometry.hpp"
#include "qcm/mask.hpp"
#include "qcm/packing.hpp"
#include "qcm/rand.hpp"

namespace qcm_tests {

using qcm::CompactMask;
using qcm::DyadicCube;
using qcm::PackingFamily;
using qcm::Square;

inline CompactMask random_mask(std::mt19937_64& g, int level, double density,
                               std::size_t max_pixels = 1u << 31) {
  const std::uint64_t side = 1ull << level;
  std::vector<std::array<std::uint32_t, 2>> px;
  if (side * side <= 4096) {
    for (std::uint32_t iy = 0; iy < side; ++iy)
      for (std::uint32_t ix = 0; ix < side; ++ix)
        if (qcm::uniform01(g) < density) px.push_back({ix, iy});
  } else {
    // Sparse draw for deep levels: sample counts, dedup via the mask ctor.
    const std::size_t want = std::min<std::size_t>(
        max_pixels, static_cast<std::size_t>(density * double(side) * double(side)) + 1);
    for (std::size_t i = 0; i < want; ++i)
      px.push_back({static_cast<std::uint32_t>(qcm::uniform_index(g, side)),
                    static_cast<std::uint32_t>(qcm::uniform_index(g, side))});
  }
  if (px.empty())
    px.push_back({static_cast<std::uint32_t>(qcm::uniform_index(g, side)),
                  static_cast<std::uint32_t>(qcm::uniform_index(g, side))});
  return CompactMask(level, px);
}

// Clustered mask: a few seed points with dyadic blocks around them. Exercises
// covers that genuinely prefer intermediate cube sizes.
inline CompactMask clustered_mask(std::mt19937_64& g, int level, int clusters) {
  const std::uint64_t side = 1ull << level;
  std::vector<std::array<std::uint32_t, 2>> px;
  for (int c = 0; c < clusters; ++c) {
    const std::uint64_t cx = qcm::uniform_index(g, side);
    const std::uint64_t cy = qcm::uniform_index(g, side);
    const std::uint64_t r = 1 + qcm::uniform_index(g, std::max<std::uint64_t>(side / 4, 1));
    for (std::uint64_t dy = 0; dy < r; ++dy)
      for (std::uint64_t dx = 0; dx < r; ++dx) {
        const std::uint64_t x = cx + dx, y = cy + dy;
        if (x < side && y < side)
          px.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)});
      }
  }
  if (px.empty()) px.push_back({0, 0});
  return CompactMask(level, px);
}

// ---- content oracle 1: literal cover enumeration (use only for level <= 3).
// Returns the costs of every admissible cover shape of the subtree: either
// take the cube, or recurse into all four children independently. Empty
// subtrees contribute cost 0.
inline std::vector<double> enumerate_cover_costs(const std::vector<CompactMask>& levels,
                                                 double t, int level, long long ix,
                                                 long long iy) {
  const int M = levels.back().level();
  if (!levels[static_cast<std::size_t>(level)].contains(static_cast<std::uint32_t>(ix),
                                                        static_cast<std::uint32_t>(iy)))
    return {0.0};
  const double own = std::pow(std::ldexp(1.0, -level), t);
  if (level == M) return {own};
  std::array<std::vector<double>, 4> kid;
  int k = 0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      kid[k++] = enumerate_cover_costs(levels, t, level + 1, 2 * ix + dx, 2 * iy + dy);
  std::vector<double> out{own};
  for (double a : kid[0])
    for (double b : kid[1])
      for (double c : kid[2])
        for (double d : kid[3]) out.push_back(a + b + c + d);
  return out;
}

inline double enumerated_min_cover(const CompactMask& mask, double t) {
  std::vector<CompactMask> levels;
  for (int l = 0; l <= mask.level(); ++l) levels.push_back(mask.coarsened(l));
  const auto costs = enumerate_cover_costs(levels, t, 0, 0, 0);
  return *std::min_element(costs.begin(), costs.end());
}

// ---- content oracle 2: direct recursion on a row-major pixel list, no
// memoization and no Morton machinery (use for level <= 6).
inline double recursive_min_cover(const std::vector<std::array<std::uint32_t, 2>>& pixels,
                                  int M, double t, int level, std::uint64_t cx,
                                  std::uint64_t cy) {
  const int d = M - level;
  bool any = false;
  for (const auto& p : pixels)
    if ((p[0] >> d) == cx && (p[1] >> d) == cy) {
      any = true;
      break;
    }
  if (!any) return 0.0;
  const double own = std::pow(std::ldexp(1.0, -level), t);
  if (level == M) return own;
  double sum = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      sum += recursive_min_cover(pixels, M, t, level + 1, 2 * cx + dx, 2 * cy + dy);
  return std::min(own, sum);
}

inline double recursive_content(const CompactMask& mask, double t) {
  if (mask.empty()) return 0.0;
  std::vector<std::array<std::uint32_t, 2>> pixels;
  for (std::size_t i = 0; i < mask.count(); ++i) pixels.push_back(mask.pixel(i));
  std::sort(pixels.begin(), pixels.end(),
            [](const auto& a, const auto& b) { return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0]; });
  return recursive_min_cover(pixels, mask.level(), t, 0, 0, 0);
}

// ---- packing norm oracle: brute force over all dyadic cubes of the window
// covering the unit square (valid when all family cubes sit inside it).
inline double brute_pack_norm(const std::vector<DyadicCube>& cubes, double t,
                              int max_level) {
  double best = 0.0;
  for (int l = 0; l <= max_level; ++l) {
    const long long n = 1ll << l;
    for (long long ix = 0; ix < n; ++ix)
      for (long long iy = 0; iy < n; ++iy) {
        const DyadicCube q{l, ix, iy};
        double sum = 0.0;
        for (const DyadicCube& p : cubes)
          if (qcm::cube_contains(q, p)) sum += std::pow(p.side(), t);
        if (sum > 0.0)
          best = std::max(best, std::pow(std::pow(q.side(), -t) * sum, 1.0 / t));
      }
  }
  return best;
}

// ---- construction predicate checks (the four guarantees).
struct PredicateReport {
  bool dilations_disjoint = true;
  bool covers_mask = true;
  bool norm_ok = true;
  bool sum_ok = true;
  std::string detail;

  bool all() const { return dilations_disjoint && covers_mask && norm_ok && sum_ok; }
};

inline PredicateReport check_construction(const CompactMask& mask, double t, double eps,
                                          int m, const PackingFamily& fam) {
  PredicateReport rep;
  const double dil = std::ldexp(1.0, m);

  for (std::size_t i = 0; i < fam.cubes.size() && rep.dilations_disjoint; ++i)
    for (std::size_t j = i + 1; j < fam.cubes.size(); ++j)
      if (qcm::meets(qcm::dilate(fam.cubes[i], dil), qcm::dilate(fam.cubes[j], dil))) {
        rep.dilations_disjoint = false;
        rep.detail = "dilations meet";
        break;
      }

  std::vector<Square> big;
  big.reserve(fam.cubes.size());
  for (const DyadicCube& p : fam.cubes) big.push_back(qcm::dilate(p, 3.0 * dil));
  for (std::size_t i = 0; i < mask.count(); ++i) {
    const auto px = mask.pixel(i);
    const DyadicCube cell{mask.level(), px[0], px[1]};
    const Square cs = cell.square();
    bool covered = false;
    for (const Square& s : big)
      if (s.contains(cs)) {
        covered = true;
        break;
      }
    if (!covered) {
      rep.covers_mask = false;
      rep.detail = "pixel escapes the 3*2^m dilations";
      break;
    }
  }

  const double norm = qcm::t_pack_norm(fam.cubes, t);
  rep.norm_ok = norm <= 1.0 + 1e-12;
  double sum = 0.0;
  for (const DyadicCube& p : fam.cubes) sum += std::pow(p.side(), t);
  const double bound =
      9.0 * std::pow(2.0, (m + 1) * t) * (qcm::dyadic_content(mask, t) + eps);
  rep.sum_ok = sum <= bound * (1.0 + 1e-12);
  if (!rep.norm_ok) rep.detail = "packing norm " + std::to_string(norm);
  if (!rep.sum_ok) rep.detail = "mass sum " + std::to_string(sum) + " vs " + std::to_string(bound);
  return rep;
}

// Validity of a minimizing cover against its mask: cost matches the content,
// cubes meet the mask, the union covers it, and the local mass property
// holds at every quadtree ancestor.
inline bool check_cover(const CompactMask& mask, double t,
                        const std::vector<DyadicCube>& cover, std::string* why) {
  const double content = qcm::dyadic_content(mask, t);
  double cost = 0.0;
  for (const DyadicCube& q : cover) cost += std::pow(q.side(), t);
  if (std::abs(cost - content) > 1e-12 * std::max(1.0, content)) {
    *why = "cover cost differs from content";
    return false;
  }
  if (mask.empty()) return cover.empty();

  std::vector<CompactMask> levels;
  for (int l = 0; l <= mask.level(); ++l) levels.push_back(mask.coarsened(l));
  std::set<std::array<long long, 3>> members;
  for (const DyadicCube& q : cover) {
    if (q.level < 0 || q.level > mask.level()) {
      *why = "cover cube outside the level window";
      return false;
    }
    if (!levels[static_cast<std::size_t>(q.level)].contains(static_cast<std::uint32_t>(q.ix),
                                                            static_cast<std::uint32_t>(q.iy))) {
      *why = "cover cube misses the mask";
      return false;
    }
    members.insert({q.level, q.ix, q.iy});
  }
  for (std::size_t i = 0; i < mask.count(); ++i) {
    const auto px = mask.pixel(i);
    DyadicCube c{mask.level(), px[0], px[1]};
    bool covered = false;
    for (int l = mask.level(); l >= 0; --l) {
      const DyadicCube a = c.ancestor(l);
      if (members.count({a.level, a.ix, a.iy})) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      *why = "pixel not covered";
      return false;
    }
  }
  // Local property: ancestor masses never exceed the ancestor's own mass.
  std::map<std::array<long long, 3>, double> acc;
  for (const DyadicCube& q : cover) {
    const double w = std::pow(q.side(), t);
    for (int l = q.level; l >= 0; --l) {
      const DyadicCube a = q.ancestor(l);
      acc[{a.level, a.ix, a.iy}] += w;
    }
  }
  for (const auto& [key, sum] : acc)
    if (sum > std::pow(std::ldexp(1.0, -static_cast<int>(key[0])), t) * (1.0 + 1e-12)) {
      *why = "local mass property violated";
      return false;
    }
  return true;
}

}  // namespace qcm_tests

#endif
