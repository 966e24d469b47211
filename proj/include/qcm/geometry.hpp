#ifndef QCM_GEOMETRY_HPP
#define QCM_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qcm {

using cplx = std::complex<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

// Axis-parallel closed square, not necessarily dyadic.
struct Square {
  Vec2 center;
  double side = 1.0;

  Vec2 lo() const { return {center.x - 0.5 * side, center.y - 0.5 * side}; }
  Vec2 hi() const { return {center.x + 0.5 * side, center.y + 0.5 * side}; }

  bool contains(Vec2 p) const {
    Vec2 a = lo(), b = hi();
    return p.x >= a.x && p.x <= b.x && p.y >= a.y && p.y <= b.y;
  }
  bool contains(const Square& q) const {
    Vec2 a = lo(), b = hi(), qa = q.lo(), qb = q.hi();
    return qa.x >= a.x && qb.x <= b.x && qa.y >= a.y && qb.y <= b.y;
  }
};

// Closed intersection test (shared edges and corners count).
inline bool meets(const Square& a, const Square& b) {
  Vec2 alo = a.lo(), ahi = a.hi(), blo = b.lo(), bhi = b.hi();
  return alo.x <= bhi.x && blo.x <= ahi.x && alo.y <= bhi.y && blo.y <= ahi.y;
}

// Dyadic square: side 2^(-level), lower-left corner (ix,iy)*2^(-level).
// Closed-cube convention everywhere except point location.
// level may be negative (sides > 1 occur for dilated/mesh cubes).
struct DyadicCube {
  int level = 0;
  long long ix = 0;
  long long iy = 0;

  double side() const { return std::ldexp(1.0, -level); }
  Vec2 corner() const {
    return {std::ldexp(double(ix), -level), std::ldexp(double(iy), -level)};
  }
  Vec2 center() const {
    double s = side();
    Vec2 c = corner();
    return {c.x + 0.5 * s, c.y + 0.5 * s};
  }
  Square square() const { return {center(), side()}; }

  // Ancestor at a coarser (smaller) level. Signed shift is arithmetic, so
  // negative indices floor correctly.
  DyadicCube ancestor(int lvl) const {
    int d = level - lvl;
    return {lvl, ix >> d, iy >> d};
  }
  DyadicCube parent() const { return ancestor(level - 1); }
  DyadicCube child(int dx, int dy) const {
    return {level + 1, 2 * ix + dx, 2 * iy + dy};
  }

  bool operator==(const DyadicCube&) const = default;
};

enum class Nesting { equal, contains, inside, disjoint };

// Trichotomy for dyadic cubes: equal, nested (either way), or disjoint
// interiors. Grid property; boundaries may still touch in the disjoint case.
Nesting nesting(const DyadicCube& a, const DyadicCube& b);

// Containment a >= b as sets (equal counts).
inline bool cube_contains(const DyadicCube& a, const DyadicCube& b) {
  Nesting r = nesting(a, b);
  return r == Nesting::equal || r == Nesting::contains;
}

// The unique level-l cube whose half-open version [c, c+s) contains p.
// Half-open only here; everything downstream treats cubes as closed.
DyadicCube locate(Vec2 p, int level);

// Concentric dilation aQ.
Square dilate(const DyadicCube& q, double a);
Square dilate(const Square& q, double a);

// Member of the two-parameter shifted mesh: side 2^scale, lower-left corner
// 2^scale * (k + s*alpha) with s = (-1)^sign_index and alpha = (ax,ay)/3.
struct MeshMember {
  int sign_index = 0;  // 0 or 1
  int scale = 0;
  int ax = 0, ay = 0;  // alpha numerators, in {0,1,2}
  long long kx = 0, ky = 0;

  double side() const { return std::ldexp(1.0, scale); }
  Vec2 corner() const {
    double s2 = side();
    double sgn = sign_index == 0 ? 1.0 : -1.0;
    return {s2 * (double(kx) + sgn * ax / 3.0),
            s2 * (double(ky) + sgn * ay / 3.0)};
  }
  Square square() const {
    double s2 = side();
    Vec2 c = corner();
    return {{c.x + 0.5 * s2, c.y + 0.5 * s2}, s2};
  }
};

// Smallest mesh member whose 9/10-core contains Q; ties broken toward the
// lexicographically smallest (sign_index, ax, ay, kx, ky). Guarantees
// side(member) <= 9*side(Q).
MeshMember mesh_cover(const Square& q);

// True iff q meets (closed intersection) at least two of the members.
bool is_nonlocal(const Square& q, std::span<const Square> members);

// One of the nine grids inside the mesh: fixed alpha class, shift sign
// alternating with scale parity so that members across scales are nested or
// disjoint (each class is then a genuine dyadic-like grid).
struct GridSelector {
  int ax = 0, ay = 0;  // in {0,1,2}
};

Square selector_cube(GridSelector g, int scale, long long kx, long long ky);

// k-index window such that every selector cube at this scale meeting the box
// [lo,hi]^2 has kx in [kxlo,kxhi] and ky in [kylo,kyhi].
struct SelectorRange {
  long long kxlo, kxhi, kylo, kyhi;
};
SelectorRange selector_range(GridSelector g, int scale, Vec2 lo, Vec2 hi);

}  // namespace qcm

#endif
