#include "qcm/beurling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qcm/rand.hpp"

namespace qcm {

namespace {

template <typename Mult>
GridField apply_multiplier(const GridField& f, Mult mult) {
  validate(f);
  GridField out = f;
  fft_forward(out);
  int n = out.n;
  for (int iy = 0; iy < n; ++iy) {
    int ky = freq(iy, n);
    for (int ix = 0; ix < n; ++ix) {
      int kx = freq(ix, n);
      out.v[std::size_t(iy) * n + ix] *= mult(kx, ky, out.L);
    }
  }
  fft_inverse(out);
  return out;
}

cplx beurling_mult(int kx, int ky, double) {
  if (kx == 0 && ky == 0) return {0.0, 0.0};
  cplx xi{double(kx), double(ky)};
  return std::conj(xi) / xi;
}

cplx adjoint_mult(int kx, int ky, double) {
  if (kx == 0 && ky == 0) return {0.0, 0.0};
  cplx xi{double(kx), double(ky)};
  return xi / std::conj(xi);
}

cplx d_mult(int kx, int ky, double L) {
  return cplx(0.0, std::numbers::pi / L) * cplx(double(kx), -double(ky));
}

cplx dbar_mult(int kx, int ky, double L) {
  return cplx(0.0, std::numbers::pi / L) * cplx(double(kx), double(ky));
}

cplx cauchy_mult(int kx, int ky, double L) {
  if (kx == 0 && ky == 0) return {0.0, 0.0};
  return 1.0 / dbar_mult(kx, ky, L);
}

}  // namespace

GridField beurling_apply(const GridField& f) {
  return apply_multiplier(f, beurling_mult);
}

GridField beurling_adjoint_apply(const GridField& f) {
  return apply_multiplier(f, adjoint_mult);
}

GridField d_apply(const GridField& f) { return apply_multiplier(f, d_mult); }

GridField dbar_apply(const GridField& f) {
  return apply_multiplier(f, dbar_mult);
}

GridField cauchy_apply(const GridField& g) {
  return apply_multiplier(g, cauchy_mult);
}

FamilyRaster rasterize_family(const PackingFamily& fam, double t,
                              const GridField& layout, Vec2 shift,
                              int min_side) {
  validate(layout);
  int n = layout.n;
  double h = layout.h();
  FamilyRaster r;
  r.n = n;
  // (start, count, weight, cube index) per cube, then a sort merges the rows.
  struct Block {
    long long sx, sy, cnt;
    double w;
    std::uint32_t cube;
  };
  std::vector<Block> blocks;
  blocks.reserve(fam.cubes.size());
  for (std::size_t ci = 0; ci < fam.cubes.size(); ++ci) {
    const DyadicCube& q = fam.cubes[ci];
    double side = q.side();
    Vec2 c = q.corner();
    double fx = (c.x + shift.x - layout.origin.x) / h;
    double fy = (c.y + shift.y - layout.origin.y) / h;
    long long sx = std::llround(fx), sy = std::llround(fy);
    long long cnt = std::llround(side / h);
    if (std::abs(fx - double(sx)) > 1e-9 || std::abs(fy - double(sy)) > 1e-9)
      throw std::invalid_argument(
          "family cube corners must land on grid samples");
    if (cnt < min_side)
      throw std::invalid_argument(
          "family cube under the raster floor of 4 samples per side");
    if (sx < 0 || sy < 0 || sx + cnt > n || sy + cnt > n)
      throw std::invalid_argument("family cube outside the grid window");
    blocks.push_back({sx, sy, cnt, std::pow(side, t - 2.0), (std::uint32_t)ci});
  }
  std::size_t total = 0;
  for (const Block& b : blocks) total += std::size_t(b.cnt) * b.cnt;
  r.idx.reserve(total);
  r.weight.reserve(total);
  r.cube_of.reserve(total);
  for (const Block& b : blocks) {
    for (long long y = b.sy; y < b.sy + b.cnt; ++y)
      for (long long x = b.sx; x < b.sx + b.cnt; ++x) {
        r.idx.push_back(std::uint32_t(y * n + x));
        r.weight.push_back(b.w);
        r.cube_of.push_back(b.cube);
      }
  }
  // Disjoint cubes never repeat a sample; one permutation orders the rows.
  std::vector<std::uint32_t> perm(r.idx.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(),
            [&](std::uint32_t a, std::uint32_t b) { return r.idx[a] < r.idx[b]; });
  FamilyRaster sorted;
  sorted.n = n;
  sorted.idx.reserve(r.idx.size());
  sorted.weight.reserve(r.idx.size());
  sorted.cube_of.reserve(r.idx.size());
  for (std::uint32_t p : perm) {
    sorted.idx.push_back(r.idx[p]);
    sorted.weight.push_back(r.weight[p]);
    sorted.cube_of.push_back(r.cube_of[p]);
  }
  return sorted;
}

GridField compressed_apply(const GridField& f, const PackingFamily& fam,
                           Vec2 shift) {
  validate(f);
  FamilyRaster r = rasterize_family(fam, fam.t, f, shift);
  GridField cut = GridField::zeros(f.n, f.L, f.origin);
  for (std::uint32_t s : r.idx) cut.v[s] = f.v[s];
  GridField out = beurling_apply(cut);
  GridField proj = GridField::zeros(f.n, f.L, f.origin);
  for (std::uint32_t s : r.idx) proj.v[s] = out.v[s];
  return proj;
}

WeightedNormReport weighted_norm_estimate(const PackingFamily& fam, double t,
                                          int n, double tol, int max_iters,
                                          std::uint64_t seed, double L,
                                          Vec2 origin, Vec2 shift) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  WeightedNormReport rep;
  rep.t = t;
  rep.n = n;
  rep.cube_count = fam.cubes.size();
  if (fam.cubes.empty()) {
    rep.converged = true;
    return rep;
  }
  for (std::size_t i = 0; i < fam.cubes.size(); ++i)
    for (std::size_t j = i + 1; j < fam.cubes.size(); ++j)
      if (meets(dilate(fam.cubes[i], 3.0), dilate(fam.cubes[j], 3.0)))
        throw std::invalid_argument(
            "family must have pairwise disjoint 3-dilations");
  if (t_pack_norm(fam.cubes, t) > 1.0 + 1e-12)
    throw std::invalid_argument("family packing norm must be <= 1");

  GridField layout = GridField::zeros(n, L, origin);
  FamilyRaster r = rasterize_family(fam, t, layout, shift);
  std::size_t m = r.idx.size();
  std::vector<double> sqw(m);
  for (std::size_t s = 0; s < m; ++s) sqw[s] = std::sqrt(r.weight[s]);

  std::mt19937_64 rng(seed);
  std::vector<cplx> v(m);
  double nrm = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    v[s] = cplx(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    nrm += std::norm(v[s]);
  }
  nrm = std::sqrt(nrm);
  for (cplx& z : v) z /= nrm;

  GridField field = GridField::zeros(n, L, origin);
  std::vector<cplx> y(m), u(m);
  double rho = 0.0, rho_prev = 0.0;
  int it = 0;
  while (it < max_iters) {
    ++it;
    // y = B v with B = sqrt(w) o (chi S chi) o 1/sqrt(w)
    std::fill(field.v.begin(), field.v.end(), cplx{0.0, 0.0});
    for (std::size_t s = 0; s < m; ++s) field.v[r.idx[s]] = v[s] / sqw[s];
    GridField sf = beurling_apply(field);
    rho = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      y[s] = sf.v[r.idx[s]] * sqw[s];
      rho += std::norm(y[s]);
    }
    // u = B* y, then v = u / |u|
    std::fill(field.v.begin(), field.v.end(), cplx{0.0, 0.0});
    for (std::size_t s = 0; s < m; ++s) field.v[r.idx[s]] = y[s] * sqw[s];
    GridField sa = beurling_adjoint_apply(field);
    double unrm = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      u[s] = sa.v[r.idx[s]] / sqw[s];
      unrm += std::norm(u[s]);
    }
    unrm = std::sqrt(unrm);
    if (unrm == 0.0) break;  // annihilated start vector; estimate is 0
    for (std::size_t s = 0; s < m; ++s) v[s] = u[s] / unrm;
    double rel = std::abs(rho - rho_prev) / std::max(rho, 1e-300);
    rep.residual = rel;
    if (it > 1 && rel < tol) {
      rep.converged = true;
      break;
    }
    rho_prev = rho;
  }
  rep.iterations = it;
  rep.estimate = std::sqrt(rho);
  return rep;
}

namespace {

// Summed-area table over samples; query is a half-open index box clipped to
// the window.
template <typename T>
struct Sat {
  int n;
  std::vector<T> p;  // (n+1)^2

  explicit Sat(int n_, const T* data) : n(n_), p(std::size_t(n_ + 1) * (n_ + 1)) {
    for (int y = 0; y < n; ++y) {
      T row{};
      for (int x = 0; x < n; ++x) {
        row += data[std::size_t(y) * n + x];
        p[std::size_t(y + 1) * (n + 1) + x + 1] =
            p[std::size_t(y) * (n + 1) + x + 1] + row;
      }
    }
  }
  T box(long long x0, long long x1, long long y0, long long y1) const {
    x0 = std::max(x0, 0ll);
    y0 = std::max(y0, 0ll);
    x1 = std::min(x1, (long long)n);
    y1 = std::min(y1, (long long)n);
    if (x0 >= x1 || y0 >= y1) return T{};
    const auto at = [&](long long y, long long x) {
      return p[std::size_t(y) * (n + 1) + x];
    };
    return at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0);
  }
};

struct IndexBox {
  long long x0, x1, y0, y1;
};

// Samples of the half-open square [lo, lo+side) x [lo, lo+side).
IndexBox sample_box(const Square& q, const GridField& layout) {
  double h = layout.h();
  Vec2 lo = q.lo();
  double ax = (lo.x - layout.origin.x) / h;
  double ay = (lo.y - layout.origin.y) / h;
  double cnt = q.side / h;
  IndexBox b;
  b.x0 = (long long)std::ceil(ax - 1e-12);
  b.y0 = (long long)std::ceil(ay - 1e-12);
  b.x1 = (long long)std::ceil(ax + cnt - 1e-12);
  b.y1 = (long long)std::ceil(ay + cnt - 1e-12);
  return b;
}

std::vector<Square> shifted_squares(const PackingFamily& fam, Vec2 shift) {
  std::vector<Square> sq;
  sq.reserve(fam.cubes.size());
  for (const DyadicCube& q : fam.cubes) {
    Square s = q.square();
    s.center = s.center + shift;
    sq.push_back(s);
  }
  return sq;
}

struct ScaleRange {
  int lo, hi;
};

ScaleRange mesh_scales(const GridField& layout) {
  double h = layout.h();
  int j0 = (int)std::ceil(std::log2(4.0 * h) - 1e-12);
  int j1 = (int)std::floor(std::log2(layout.L) + 1e-12);
  return {j0, j1};
}

}  // namespace

GridField sq_apply(const GridField& f, const PackingFamily& fam,
                   GridSelector sel, Vec2 shift) {
  validate(f);
  if (sel.ax < 0 || sel.ax > 2 || sel.ay < 0 || sel.ay > 2)
    throw std::invalid_argument("selector components must be in {0,1,2}");
  // The raster floor applies to the family exactly as in compressed_apply.
  rasterize_family(fam, fam.t, f, shift);
  GridField out = GridField::zeros(f.n, f.L, f.origin);
  if (fam.cubes.size() < 2) return out;  // no cube can meet two members

  std::vector<Square> members = shifted_squares(fam, shift);
  Vec2 blo = members[0].lo(), bhi = members[0].hi();
  for (const Square& s : members) {
    blo = {std::min(blo.x, s.lo().x), std::min(blo.y, s.lo().y)};
    bhi = {std::max(bhi.x, s.hi().x), std::max(bhi.y, s.hi().y)};
  }
  Sat<cplx> sat(f.n, f.v.data());
  double h = f.h(), h2 = h * h;
  auto [j0, j1] = mesh_scales(f);
  for (int j = j0; j <= j1; ++j) {
    double s2 = std::ldexp(1.0, j);
    // Only cubes meeting the family bounding box can be non-local.
    SelectorRange kr = selector_range(sel, j, {blo.x - s2, blo.y - s2},
                                      {bhi.x + s2, bhi.y + s2});
    for (long long ky = kr.kylo; ky <= kr.kyhi; ++ky) {
      for (long long kx = kr.kxlo; kx <= kr.kxhi; ++kx) {
        Square q = selector_cube(sel, j, kx, ky);
        if (!is_nonlocal(q, members)) continue;
        IndexBox b = sample_box(q, f);
        cplx integral = sat.box(b.x0, b.x1, b.y0, b.y1) * h2;
        cplx val = integral / (s2 * s2);
        long long x0 = std::max(b.x0, 0ll), x1 = std::min(b.x1, (long long)f.n);
        long long y0 = std::max(b.y0, 0ll), y1 = std::min(b.y1, (long long)f.n);
        for (long long y = y0; y < y1; ++y)
          for (long long x = x0; x < x1; ++x)
            out.v[std::size_t(y) * f.n + x] += val;
      }
    }
  }
  return out;
}

GridField maximal_mt(const GridField& g, const PackingFamily& fam, double t,
                     GridSelector sel, Vec2 shift) {
  validate(g);
  if (sel.ax < 0 || sel.ax > 2 || sel.ay < 0 || sel.ay > 2)
    throw std::invalid_argument("selector components must be in {0,1,2}");
  FamilyRaster r = rasterize_family(fam, t, g, shift);
  GridField out = GridField::zeros(g.n, g.L, g.origin);
  if (fam.cubes.size() < 2) return out;

  std::vector<double> w(std::size_t(g.n) * g.n, 0.0);
  std::vector<double> gw(std::size_t(g.n) * g.n, 0.0);
  for (std::size_t s = 0; s < r.idx.size(); ++s) {
    w[r.idx[s]] = r.weight[s];
    gw[r.idx[s]] = r.weight[s] * g.v[r.idx[s]].real();
  }
  Sat<double> wsat(g.n, w.data());
  Sat<double> gwsat(g.n, gw.data());

  std::vector<Square> members = shifted_squares(fam, shift);
  Vec2 blo = members[0].lo(), bhi = members[0].hi();
  for (const Square& s : members) {
    blo = {std::min(blo.x, s.lo().x), std::min(blo.y, s.lo().y)};
    bhi = {std::max(bhi.x, s.hi().x), std::max(bhi.y, s.hi().y)};
  }
  auto [j0, j1] = mesh_scales(g);
  double h2 = g.h() * g.h();
  for (int j = j0; j <= j1; ++j) {
    double s2 = std::ldexp(1.0, j);
    SelectorRange kr = selector_range(sel, j, {blo.x - s2, blo.y - s2},
                                      {bhi.x + s2, bhi.y + s2});
    for (long long ky = kr.kylo; ky <= kr.kyhi; ++ky) {
      for (long long kx = kr.kxlo; kx <= kr.kxhi; ++kx) {
        Square q = selector_cube(sel, j, kx, ky);
        if (!is_nonlocal(q, members)) continue;
        IndexBox b = sample_box(q, g);
        double wq = wsat.box(b.x0, b.x1, b.y0, b.y1) * h2;
        if (wq <= 0.0) continue;
        double avg = gwsat.box(b.x0, b.x1, b.y0, b.y1) * h2 / wq;
        long long x0 = std::max(b.x0, 0ll), x1 = std::min(b.x1, (long long)g.n);
        long long y0 = std::max(b.y0, 0ll), y1 = std::min(b.y1, (long long)g.n);
        for (long long y = y0; y < y1; ++y)
          for (long long x = x0; x < x1; ++x) {
            cplx& o = out.v[std::size_t(y) * g.n + x];
            if (avg > o.real()) o = cplx(avg, 0.0);
          }
      }
    }
  }
  return out;
}

}  // namespace qcm
