#include "qcm/geometry.hpp"

#include <cassert>
#include <stdexcept>

namespace qcm {

Nesting nesting(const DyadicCube& a, const DyadicCube& b) {
  if (a.level == b.level) {
    if (a.ix == b.ix && a.iy == b.iy) return Nesting::equal;
    return Nesting::disjoint;
  }
  if (a.level < b.level) {
    DyadicCube anc = b.ancestor(a.level);
    return (anc.ix == a.ix && anc.iy == a.iy) ? Nesting::contains
                                              : Nesting::disjoint;
  }
  DyadicCube anc = a.ancestor(b.level);
  return (anc.ix == b.ix && anc.iy == b.iy) ? Nesting::inside
                                            : Nesting::disjoint;
}

DyadicCube locate(Vec2 p, int level) {
  double sc = std::ldexp(1.0, level);
  return {level, (long long)std::floor(p.x * sc), (long long)std::floor(p.y * sc)};
}

Square dilate(const DyadicCube& q, double a) {
  if (!(a > 0)) throw std::invalid_argument("dilate: factor must be positive");
  return {q.center(), a * q.side()};
}

Square dilate(const Square& q, double a) {
  if (!(a > 0)) throw std::invalid_argument("dilate: factor must be positive");
  return {q.center, a * q.side};
}

namespace {

// Smallest k with 2^scale*(k + off) >= lo, adjusted for rounding. Returns
// false if the resulting corner overshoots hi.
bool axis_candidate(double lo, double hi, double s2, double off, long long& k) {
  k = (long long)std::ceil(lo / s2 - off);
  // Guard against ulp drift in the division: enforce minimal k with
  // corner(k) >= lo using the same arithmetic the caller will use.
  while (s2 * (double(k) + off) < lo) ++k;
  while (s2 * (double(k - 1) + off) >= lo) --k;
  return s2 * (double(k) + off) <= hi;
}

}  // namespace

MeshMember mesh_cover(const Square& q) {
  if (!(q.side > 0)) throw std::invalid_argument("mesh_cover: side must be positive");
  Vec2 qlo = q.lo(), qhi = q.hi();
  // Smallest scale with 0.9 * 2^j >= side(q); a member of some shift class
  // exists by scale jmin+1 at the latest (candidate corners are 2^j/3 apart
  // across the alpha classes, and the admissible corner window has length
  // 0.9*2^j - side >= 2^j/3 once 2^j >= side/(0.9 - 1/3)).
  int j = (int)std::ceil(std::log2(q.side / 0.9));
  while (std::ldexp(0.9, j) < q.side) ++j;
  for (int guard = 0; guard < 8; ++guard, ++j) {
    double s2 = std::ldexp(1.0, j);
    // Corner window per axis: [hi - 0.95*s2, lo - 0.05*s2].
    double cx_lo = qhi.x - 0.95 * s2, cx_hi = qlo.x - 0.05 * s2;
    double cy_lo = qhi.y - 0.95 * s2, cy_hi = qlo.y - 0.05 * s2;
    if (cx_lo > cx_hi || cy_lo > cy_hi) continue;
    for (int i = 0; i < 2; ++i) {
      double sgn = i == 0 ? 1.0 : -1.0;
      for (int ax = 0; ax < 3; ++ax) {
        for (int ay = 0; ay < 3; ++ay) {
          long long kx, ky;
          if (!axis_candidate(cx_lo, cx_hi, s2, sgn * ax / 3.0, kx)) continue;
          if (!axis_candidate(cy_lo, cy_hi, s2, sgn * ay / 3.0, ky)) continue;
          MeshMember m{i, j, ax, ay, kx, ky};
          // Paranoia against float drift: re-verify the 9/10-core property.
          Square core = dilate(m.square(), 0.9);
          if (core.contains(q)) return m;
        }
      }
    }
  }
  throw std::logic_error("mesh_cover: no admissible member found");
}

bool is_nonlocal(const Square& q, std::span<const Square> members) {
  int hits = 0;
  for (const Square& p : members) {
    if (meets(q, p) && ++hits >= 2) return true;
  }
  return false;
}

Square selector_cube(GridSelector g, int scale, long long kx, long long ky) {
  double s2 = std::ldexp(1.0, scale);
  double sgn = (scale % 2 == 0) ? 1.0 : -1.0;
  double cx = s2 * (double(kx) + sgn * g.ax / 3.0);
  double cy = s2 * (double(ky) + sgn * g.ay / 3.0);
  return {{cx + 0.5 * s2, cy + 0.5 * s2}, s2};
}

SelectorRange selector_range(GridSelector g, int scale, Vec2 lo, Vec2 hi) {
  double s2 = std::ldexp(1.0, scale);
  double sgn = (scale % 2 == 0) ? 1.0 : -1.0;
  double ox = sgn * g.ax / 3.0, oy = sgn * g.ay / 3.0;
  SelectorRange r;
  r.kxlo = (long long)std::floor(lo.x / s2 - ox) - 1;
  r.kxhi = (long long)std::floor(hi.x / s2 - ox) + 1;
  r.kylo = (long long)std::floor(lo.y / s2 - oy) - 1;
  r.kyhi = (long long)std::floor(hi.y / s2 - oy) + 1;
  return r;
}

}  // namespace qcm
