#include "qcm/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcm {

BeltramiCoefficient::BeltramiCoefficient(GridField mu_field)
    : mu(std::move(mu_field)) {
  validate(mu);
  double k = 0.0;
  double lo_x = mu.origin.x + 0.25 * mu.L, hi_x = mu.origin.x + 0.75 * mu.L;
  double lo_y = mu.origin.y + 0.25 * mu.L, hi_y = mu.origin.y + 0.75 * mu.L;
  for (int iy = 0; iy < mu.n; ++iy) {
    for (int ix = 0; ix < mu.n; ++ix) {
      double a = std::abs(mu.at(ix, iy));
      if (a == 0.0) continue;
      k = std::max(k, a);
      Vec2 p = mu.point(ix, iy);
      if (p.x < lo_x || p.x >= hi_x || p.y < lo_y || p.y >= hi_y)
        throw std::invalid_argument(
            "mu support must lie in the centered unit square");
    }
  }
  if (k >= 1.0) throw std::invalid_argument("kappa must be < 1");
  kappa = k;
}

PrincipalMapSolution solve_principal(const BeltramiCoefficient& mu,
                                     int max_terms, double tol) {
  if (max_terms < 1) throw std::invalid_argument("max_terms must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const GridField& m = mu.mu;

  PrincipalMapSolution sol;
  GridField fzbar = GridField::zeros(m.n, m.L, m.origin);
  GridField term = m;
  double mu_norm = l2_norm(m);

  if (mu_norm == 0.0) {
    sol.converged = true;
  } else {
    for (int k = 1; k <= max_terms; ++k) {
      double tn = l2_norm(term);
      sol.term_norms.push_back(tn);
      for (std::size_t i = 0; i < fzbar.v.size(); ++i) fzbar.v[i] += term.v[i];
      sol.terms_used = k;
      if (tn < tol * mu_norm) {
        sol.converged = true;
        break;
      }
      if (k == max_terms) break;
      GridField st = beurling_apply(term);
      for (std::size_t i = 0; i < st.v.size(); ++i) st.v[i] *= m.v[i];
      term = std::move(st);
    }
    sol.tail_bound = std::pow(mu.kappa, sol.terms_used) /
                     std::max(1.0 - mu.kappa, 1e-300);
  }

  sol.fz = beurling_apply(fzbar);
  for (cplx& z : sol.fz.v) z += 1.0;
  sol.f = cauchy_apply(fzbar);
  for (int iy = 0; iy < m.n; ++iy)
    for (int ix = 0; ix < m.n; ++ix) {
      Vec2 p = m.origin;
      p.x += ix * m.h();
      p.y += iy * m.h();
      sol.f.at(ix, iy) += cplx(p.x, p.y);
    }
  sol.jac.resize(fzbar.v.size());
  for (std::size_t i = 0; i < fzbar.v.size(); ++i)
    sol.jac[i] = std::norm(sol.fz.v[i]) - std::norm(fzbar.v[i]);
  sol.fzbar = std::move(fzbar);
  return sol;
}

double conformality_defect(const PrincipalMapSolution& sol,
                           const std::vector<std::uint8_t>& region) {
  if (region.size() != sol.fzbar.v.size())
    throw std::invalid_argument("region raster must match the grid");
  double d = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i)
    if (!region[i]) d = std::max(d, std::abs(sol.fzbar.v[i]));
  return d;
}

cplx evaluate_map(const PrincipalMapSolution& sol, Vec2 p) {
  const GridField& f = sol.f;
  int n = f.n;
  double h = f.h();
  double gx = (p.x - f.origin.x) / h, gy = (p.y - f.origin.y) / h;
  long long ix0 = (long long)std::floor(gx), iy0 = (long long)std::floor(gy);
  double fx = gx - double(ix0), fy = gy - double(iy0);
  // Displacement is periodic; the identity part is restored afterwards.
  auto disp = [&](long long ix, long long iy) {
    long long mx = ((ix % n) + n) % n, my = ((iy % n) + n) % n;
    cplx fv = f.v[std::size_t(my) * n + mx];
    double sx = f.origin.x + double(mx) * h, sy = f.origin.y + double(my) * h;
    return fv - cplx(sx, sy);
  };
  cplx d00 = disp(ix0, iy0), d10 = disp(ix0 + 1, iy0);
  cplx d01 = disp(ix0, iy0 + 1), d11 = disp(ix0 + 1, iy0 + 1);
  cplx d = (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 +
           (1 - fx) * fy * d01 + fx * fy * d11;
  return d + cplx(p.x, p.y);
}

double image_diameter(const PrincipalMapSolution& sol, const Square& s) {
  if (!(s.side > 0)) throw std::invalid_argument("square side must be positive");
  double h = sol.f.h();
  int per_edge = std::max(2, (int)std::ceil(s.side / h) + 1);
  std::vector<cplx> pts;
  pts.reserve(4 * per_edge);
  Vec2 lo = s.lo();
  for (int e = 0; e < 4; ++e) {
    for (int i = 0; i < per_edge; ++i) {
      double u = s.side * double(i) / double(per_edge - 1);
      Vec2 p;
      switch (e) {
        case 0: p = {lo.x + u, lo.y}; break;
        case 1: p = {lo.x + u, lo.y + s.side}; break;
        case 2: p = {lo.x, lo.y + u}; break;
        default: p = {lo.x + s.side, lo.y + u}; break;
      }
      pts.push_back(evaluate_map(sol, p));
    }
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, std::abs(pts[i] - pts[j]));
  return best;
}

double image_diameter(const PrincipalMapSolution& sol, const DyadicCube& p) {
  if (p.side() < 4.0 * sol.f.h())
    throw std::invalid_argument(
        "cube under the raster floor of 4 samples per side");
  return image_diameter(sol, p.square());
}

}  // namespace qcm
