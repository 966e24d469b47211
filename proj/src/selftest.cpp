#include "qcm/selftest.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "qcm/beltrami.hpp"
#include "qcm/beurling.hpp"
#include "qcm/distortion.hpp"
#include "qcm/geometry.hpp"
#include "qcm/grid.hpp"
#include "qcm/mask.hpp"
#include "qcm/packing.hpp"
#include "qcm/rand.hpp"

namespace qcm {

namespace {

struct Check {
  std::ostream& out;
  bool all = true;

  void report(const char* name, bool ok, double detail = 0.0) {
    if (ok) {
      out << "PASS " << name << "\n";
    } else {
      out << "FAIL " << name << " (" << detail << ")\n";
      all = false;
    }
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

void check_tau(Check& c) {
  std::mt19937_64 g(101);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = uniform(g, 1e-6, 2.0);
    const double k1 = uniform(g, 1.0, 8.0);
    const double k2 = uniform(g, 1.0, 8.0);
    worst = std::max(worst, std::abs(tau(tau(t, k1), k2) - tau(t, k1 * k2)));
    const auto [lo, hi] = inverse_exponent_form(t, k1);
    worst = std::max(worst, std::abs(lo - (1.0 / tau(t, k1) - 0.5)));
    worst = std::max(worst, std::abs(tau(0.0, k1)));
    worst = std::max(worst, std::abs(tau(2.0, k1) - 2.0));
    worst = std::max(worst, std::abs(tau(2.0 / (k1 + 1.0), k1) - 1.0));
    if (hi < lo) worst = std::max(worst, 1.0);
  }
  c.report("exponent algebra", worst <= 1e-9, worst);
}

void check_mesh(Check& c) {
  std::mt19937_64 g(202);
  bool ok = true;
  double bad = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double side = std::exp(uniform(g, std::log(1e-6), std::log(0.4)));
    const Square q{{uniform(g, -0.4, 0.4), uniform(g, -0.4, 0.4)}, side};
    try {
      const MeshMember mm = mesh_cover(q);
      if (!dilate(mm.square(), 0.9).contains(q)) {
        ok = false;
        bad = side;
      }
    } catch (const std::exception&) {
      ok = false;
      bad = side;
    }
  }
  c.report("shifted mesh cover", ok, bad);
}

double content_recursive(const std::vector<CompactMask>& levels, double t, int level,
                         long long ix, long long iy) {
  const int M = levels.back().level();
  const auto& at = levels[static_cast<std::size_t>(level)];
  if (!at.contains(static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)))
    return 0.0;
  const double own = std::pow(std::ldexp(1.0, -level), t);
  if (level == M) return own;
  double sum = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      sum += content_recursive(levels, t, level + 1, 2 * ix + dx, 2 * iy + dy);
  return std::min(own, sum);
}

void check_content(Check& c) {
  std::mt19937_64 g(303);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 2 + static_cast<int>(uniform_index(g, 3));
    const double t = uniform(g, 0.2, 2.0);
    std::vector<std::array<std::uint32_t, 2>> px;
    const std::uint32_t side = 1u << M;
    for (std::uint32_t iy = 0; iy < side; ++iy)
      for (std::uint32_t ix = 0; ix < side; ++ix)
        if (uniform01(g) < 0.35) px.push_back({ix, iy});
    const CompactMask mask(M, px);
    std::vector<CompactMask> levels;
    for (int l = 0; l <= M; ++l) levels.push_back(mask.coarsened(l));
    const double ref = mask.empty() ? 0.0 : content_recursive(levels, t, 0, 0, 0);
    worst = std::max(worst, std::abs(dyadic_content(mask, t) - ref));
  }
  c.report("dyadic content sweep vs recursion", worst <= 1e-12, worst);
}

void check_transform(Check& c) {
  std::mt19937_64 g(404);
  GridField f = GridField::zeros(128);
  for (auto& z : f.v) z = cplx(uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0));
  const cplx fbar = mean(f);
  for (auto& z : f.v) z -= fbar;  // the transform is an isometry off the DC mode

  const GridField sf = beurling_apply(f);
  const double iso_gap = std::abs(l2_norm(sf) - l2_norm(f));
  c.report("transform isometry", iso_gap <= 1e-10 * l2_norm(f), iso_gap);

  const GridField cf = cauchy_apply(f);
  const GridField back = dbar_apply(cf);
  const cplx mu = mean(f);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i)
    worst = std::max(worst, std::abs(back.v[i] - (f.v[i] - mu)));
  c.report("dbar inverts cauchy", worst <= 1e-9, worst);

  const GridField s2 = d_apply(cf);
  double worst2 = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i)
    worst2 = std::max(worst2, std::abs(s2.v[i] - sf.v[i]));
  c.report("transform as d of cauchy", worst2 <= 1e-9, worst2);
}

void check_identity_map(Check& c) {
  BeltramiCoefficient bc(GridField::zeros(128));
  const PrincipalMapSolution sol = solve_principal(bc, 10, 1e-12);
  double worst = 0.0;
  const int n = sol.f.n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p = sol.f.point(ix, iy);
      worst = std::max(worst, std::abs(sol.f.at(ix, iy) - cplx(p.x, p.y)));
      worst = std::max(worst, std::abs(sol.fz.at(ix, iy) - cplx(1.0, 0.0)));
    }
  c.report("zero coefficient gives identity", sol.converged && worst == 0.0, worst);
}

void check_weighted_norm(Check& c) {
  CompactMask one(3, std::vector<std::array<std::uint32_t, 2>>{{2, 3}});
  PackingFamily fam;
  fam.t = 1.0;
  fam.m = 0;
  fam.cubes = {{3, 2, 3}};
  fam.norm = t_pack_norm(fam.cubes, fam.t);
  const WeightedNormReport rep = weighted_norm_estimate(fam, 1.0, 128, 1e-6);
  c.report("single cube weighted norm", rep.estimate <= 1.0 + 1e-6, rep.estimate);
}

}  // namespace

bool selftest_run(std::ostream& out) {
  Check c{out};
  check_tau(c);
  check_mesh(c);
  check_content(c);
  check_transform(c);
  check_identity_map(c);
  check_weighted_norm(c);
  out << (c.all ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
  return c.all;
}

}  // namespace qcm
