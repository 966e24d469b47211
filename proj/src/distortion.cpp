#include "qcm/distortion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "qcm/beltrami.hpp"
#include "qcm/beurling.hpp"
#include "qcm/rand.hpp"

namespace qcm {

namespace {

void check_tau_args(double t, double K) {
  if (!(t >= 0.0 && t <= 2.0)) throw std::invalid_argument("exponent t must be in [0, 2]");
  if (!(K >= 1.0)) throw std::invalid_argument("distortion K must be >= 1");
}

}  // namespace

double tau(double t, double K) {
  check_tau_args(t, K);
  return 2.0 * K * t / (2.0 + (K - 1.0) * t);
}

std::pair<double, double> inverse_exponent_form(double t, double K) {
  if (!(t > 0.0 && t <= 2.0)) throw std::invalid_argument("exponent t must be in (0, 2]");
  if (!(K >= 1.0)) throw std::invalid_argument("distortion K must be >= 1");
  const double base = 1.0 / t - 0.5;
  return {base / K, base * K};
}

double FractalSpec::dimension() const {
  return std::log(4.0) / std::log(1.0 / ratio);
}

CompactMask cantor_mask(const FractalSpec& spec, int M) {
  if (!(spec.ratio > 0.0 && spec.ratio < 0.5))
    throw std::invalid_argument("contraction ratio must be in (0, 1/2)");
  if (spec.generations < 0 || spec.generations > 10)
    throw std::invalid_argument("generation count must be in [0, 10]");

  struct Piece {
    double x, y, s;
  };
  std::vector<Piece> pieces{{0.25, 0.25, 0.5}};
  for (int g = 0; g < spec.generations; ++g) {
    std::vector<Piece> next;
    next.reserve(pieces.size() * 4);
    for (const Piece& p : pieces) {
      const double cs = p.s * spec.ratio;
      const double far = p.s - cs;
      next.push_back({p.x, p.y, cs});
      next.push_back({p.x + far, p.y, cs});
      next.push_back({p.x, p.y + far, cs});
      next.push_back({p.x + far, p.y + far, cs});
    }
    pieces = std::move(next);
  }

  const double sc = std::ldexp(1.0, M);
  const long long last = (1ll << M) - 1;
  std::vector<std::array<std::uint32_t, 2>> px;
  for (const Piece& p : pieces) {
    // Positive-area overlap: a piece edge sitting exactly on a cell boundary
    // does not claim the far cell.
    long long x0 = static_cast<long long>(std::floor(p.x * sc));
    if (static_cast<double>(x0 + 1) <= p.x * sc) ++x0;
    long long y0 = static_cast<long long>(std::floor(p.y * sc));
    if (static_cast<double>(y0 + 1) <= p.y * sc) ++y0;
    long long x1 = static_cast<long long>(std::ceil((p.x + p.s) * sc)) - 1;
    long long y1 = static_cast<long long>(std::ceil((p.y + p.s) * sc)) - 1;
    x0 = std::max(x0, 0ll);
    y0 = std::max(y0, 0ll);
    x1 = std::min(x1, last);
    y1 = std::min(y1, last);
    for (long long iy = y0; iy <= y1; ++iy)
      for (long long ix = x0; ix <= x1; ++ix)
        px.push_back({static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)});
  }
  return CompactMask(M, px);
}

BoxDimension box_dimension(const CompactMask& mask) {
  const int M = mask.level();
  if (M < 6) throw std::invalid_argument("box dimension needs mask level >= 6");
  if (mask.empty()) throw std::invalid_argument("box dimension requires a non-empty mask");

  BoxDimension out;
  const auto& codes = mask.codes();
  std::vector<double> xs, ys;
  for (int k = 2; k <= M - 2; ++k) {
    const int shift = 2 * (M - k);
    std::size_t distinct = 0;
    std::uint32_t prev = 0;
    bool first = true;
    for (std::uint32_t c : codes) {
      const std::uint32_t pfx = c >> shift;
      if (first || pfx != prev) ++distinct;
      prev = pfx;
      first = false;
    }
    out.counts.emplace_back(k, distinct);
    xs.push_back(k * std::numbers::ln2);
    ys.push_back(std::log(static_cast<double>(distinct)));
  }

  const std::size_t npts = xs.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < npts; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(npts);
  ybar /= static_cast<double>(npts);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < npts; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < npts; ++i) {
    const double r = ys[i] - ybar - slope * (xs[i] - xbar);
    rss += r * r;
  }
  out.dimension = slope;
  out.std_error = npts > 2 ? std::sqrt(rss / (static_cast<double>(npts) - 2.0) / sxx) : 0.0;
  return out;
}

CompactMask shrink_into_corner(const CompactMask& mask) {
  const int M = mask.level();
  if (M + 5 > kMaxMaskLevel)
    throw std::invalid_argument("mask level too deep for the corner premap");
  const std::uint32_t off = 1u << M;
  std::vector<std::array<std::uint32_t, 2>> px;
  px.reserve(mask.count());
  for (std::size_t i = 0; i < mask.count(); ++i) {
    const auto p = mask.pixel(i);
    px.push_back({p[0] + off, p[1] + off});
  }
  return CompactMask(M + 5, px);
}

const char* to_string(PhaseMode m) {
  switch (m) {
    case PhaseMode::constant: return "constant";
    case PhaseMode::radial: return "radial";
    case PhaseMode::random: return "random";
  }
  return "radial";
}

PhaseMode phase_mode_from_string(const std::string& s) {
  if (s == "constant") return PhaseMode::constant;
  if (s == "radial") return PhaseMode::radial;
  if (s == "random") return PhaseMode::random;
  throw std::invalid_argument("unknown phase mode: " + s);
}

bool ExperimentReport::all_verdicts_pass() const {
  for (const auto& [key, ok] : verdicts)
    if (!ok) return false;
  return true;
}

namespace {

// |mu| = kappa on every family cube, zero elsewhere. The radial mode matches
// a pure radial stretch about each cube center; zeta/conj(zeta) has unit
// modulus away from the center and is set to 1 at it.
GridField family_coefficient(const PackingFamily& fam, const FamilyRaster& raster,
                             const GridField& layout, double kappa, PhaseMode phase,
                             std::uint64_t seed) {
  GridField mu = GridField::zeros(layout.n, layout.L, layout.origin);
  std::vector<cplx> cube_phase(fam.cubes.size(), cplx(1.0, 0.0));
  if (phase == PhaseMode::random) {
    std::mt19937_64 g(seed);
    for (auto& ph : cube_phase) ph = std::polar(1.0, 2.0 * std::numbers::pi * uniform01(g));
  }
  const int n = layout.n;
  for (std::size_t s = 0; s < raster.idx.size(); ++s) {
    const std::size_t id = raster.idx[s];
    const std::size_t j = raster.cube_of[s];
    cplx val;
    if (phase == PhaseMode::radial) {
      const Vec2 c = fam.cubes[j].center() + kCenterShift;
      const Vec2 pt = layout.point(static_cast<int>(id % n), static_cast<int>(id / n));
      const cplx zeta(pt.x - c.x, pt.y - c.y);
      const cplx ph = zeta == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : zeta / std::conj(zeta);
      val = -kappa * ph;
    } else if (phase == PhaseMode::random) {
      val = kappa * cube_phase[j];
    } else {
      val = cplx(kappa, 0.0);
    }
    mu.v[id] = val;
  }
  return mu;
}

std::vector<std::uint8_t> family_region(const FamilyRaster& raster, int n) {
  std::vector<std::uint8_t> region(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t id : raster.idx) region[id] = 1;
  return region;
}

double positive_jacobian_fraction(const PrincipalMapSolution& sol) {
  std::size_t pos = 0;
  for (double j : sol.jac)
    if (j > 0.0) ++pos;
  return static_cast<double>(pos) / static_cast<double>(sol.jac.size());
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

ExperimentReport conformal_outside_experiment(const ConformalOutsideParams& p) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(p.K >= 1.0)) throw std::invalid_argument("distortion K must be >= 1");

  ExperimentReport rep;
  rep.kind = "conformal-outside";
  rep.params = {{"t", p.t},
                {"K", p.K},
                {"n", static_cast<double>(p.n)},
                {"m", static_cast<double>(p.m)},
                {"eps", p.eps},
                {"phase_mode", static_cast<double>(static_cast<int>(p.phase))},
                {"seed", static_cast<double>(p.seed)},
                {"max_terms", static_cast<double>(p.max_terms)},
                {"solver_tol", p.solver_tol},
                {"norm_tol", p.norm_tol},
                {"mask_level", static_cast<double>(p.mask.level())},
                {"mask_count", static_cast<double>(p.mask.count())}};

  PackingFamily fam = packing_construct(p.mask, p.t, p.eps, p.m);
  GridField layout = GridField::zeros(p.n);
  FamilyRaster raster = rasterize_family(fam, p.t, layout);

  WeightedNormReport norm_rep = weighted_norm_estimate(fam, p.t, p.n, p.norm_tol);
  const double eps0 = 1.0 / (2.0 * norm_rep.estimate);
  const double kappa = (p.K - 1.0) / (p.K + 1.0);

  GridField mu = family_coefficient(fam, raster, layout, kappa, p.phase, p.seed);
  BeltramiCoefficient bc(std::move(mu));
  PrincipalMapSolution sol = solve_principal(bc, p.max_terms, p.solver_tol);

  double sum_side = 0.0, sum_diam_src = 0.0, sum_diam_img = 0.0;
  for (const DyadicCube& q : fam.cubes) {
    const double side = q.side();
    Square sq = q.square();
    sq.center = sq.center + kCenterShift;
    const double d = image_diameter(sol, sq);
    sum_side += std::pow(side, p.t);
    sum_diam_src += std::pow(std::numbers::sqrt2 * side, p.t);
    sum_diam_img += std::pow(d, p.t);
  }

  const BetaWeights bw = beta_weights(fam, p.t);
  const double i1 = std::pow(sum_side, 2.0 / p.t);
  const double h = layout.h();
  double i2 = 0.0, i3 = 0.0;
  for (std::size_t s = 0; s < raster.idx.size(); ++s) {
    const double b = bw.beta[raster.cube_of[s]];
    const std::size_t id = raster.idx[s];
    i2 += b * std::norm(sol.fz.v[id] - cplx(1.0, 0.0));
    i3 += b * std::norm(sol.fzbar.v[id]);
  }
  i2 *= h * h;
  i3 *= h * h;

  GridField s_check = beurling_apply(sol.fzbar);
  double identity_residual = 0.0;
  for (std::size_t i = 0; i < s_check.v.size(); ++i)
    identity_residual =
        std::max(identity_residual, std::abs(sol.fz.v[i] - cplx(1.0, 0.0) - s_check.v[i]));

  const double defect = conformality_defect(sol, family_region(raster, p.n));
  const double jac_frac = positive_jacobian_fraction(sol);

  rep.measured = {{"kappa", kappa},
                  {"eps0", eps0},
                  {"norm_estimate", norm_rep.estimate},
                  {"norm_iterations", static_cast<double>(norm_rep.iterations)},
                  {"family_norm", fam.norm},
                  {"family_count", static_cast<double>(fam.cubes.size())},
                  {"sum_side_t", sum_side},
                  {"sum_diam_src_t", sum_diam_src},
                  {"sum_diam_img_t", sum_diam_img},
                  {"ratio_side", sum_diam_img / sum_side},
                  {"ratio_diam", sum_diam_img / sum_diam_src},
                  {"i1", i1},
                  {"i2", i2},
                  {"i3", i3},
                  {"identity_residual", identity_residual},
                  {"defect_outside", defect},
                  {"jac_positive_frac", jac_frac},
                  {"solver_terms", static_cast<double>(sol.terms_used)},
                  {"solver_tail", sol.tail_bound}};

  rep.bounds = {{"family_norm", 1.0 + 1e-12},
                {"kappa", eps0},
                {"i3_vs_i1", i1 * (1.0 + 1e-9)},
                {"i2_vs_i3", 1.5 * i3},
                {"identity_residual", 1e-9},
                {"defect_outside", 0.0},
                {"jac_positive_frac", 0.999}};

  rep.verdicts = {{"family_norm_le_one", fam.norm <= 1.0 + 1e-12},
                  {"kappa_admissible", kappa <= eps0 + 1e-12},
                  {"solver_converged", sol.converged},
                  {"i3_le_i1", i3 <= i1 * (1.0 + 1e-9) + 1e-30},
                  {"i2_le_c_i3", i2 <= 1.5 * i3 + 1e-30},
                  {"identity_ok", identity_residual <= 1e-9},
                  {"defect_outside_zero", defect == 0.0},
                  {"jac_positive", jac_frac >= 0.999}};

  if (p.K == 1.0) {
    rep.bounds["ratio_diam_lo"] = 0.95;
    rep.bounds["ratio_diam_hi"] = 1.05;
    const double r = rep.measured["ratio_diam"];
    rep.verdicts["ratio_diam_near_one"] = r >= 0.95 && r <= 1.05;
  }

  rep.runtime_ms = elapsed_ms(t0);
  return rep;
}

namespace {

// Half-open marking of the bounding box of the five image points of a source
// cell (four corners and the center). An exact-identity map reproduces the
// source cell and nothing else.
void mark_image_box(double lox, double hix, double loy, double hiy, long long sc,
                    std::vector<std::array<std::uint32_t, 2>>& out) {
  const double scd = static_cast<double>(sc);
  long long x0 = static_cast<long long>(std::floor(lox * scd));
  long long y0 = static_cast<long long>(std::floor(loy * scd));
  long long x1 = static_cast<long long>(std::ceil(hix * scd)) - 1;
  long long y1 = static_cast<long long>(std::ceil(hiy * scd)) - 1;
  x1 = std::max(x1, x0);
  y1 = std::max(y1, y0);
  x0 = std::max(x0, 0ll);
  y0 = std::max(y0, 0ll);
  x1 = std::min(x1, sc - 1);
  y1 = std::min(y1, sc - 1);
  for (long long iy = y0; iy <= y1; ++iy)
    for (long long ix = x0; ix <= x1; ++ix)
      out.push_back({static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)});
}

}  // namespace

ExperimentReport content_distortion_experiment(const ContentDistortionParams& p) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(p.K >= 1.0)) throw std::invalid_argument("distortion K must be >= 1");
  if (p.mask.empty()) throw std::invalid_argument("mask must be non-empty");

  const double tprime = tau(p.t, p.K);
  const CompactMask mask2 = p.premap ? shrink_into_corner(p.mask) : p.mask;

  int log2n = 0;
  while ((1 << (log2n + 1)) <= p.n) ++log2n;
  int coarse_level = log2n - 6;
  if (coarse_level < 1)
    throw std::invalid_argument("grid too coarse for the family construction");
  coarse_level = std::min(coarse_level, mask2.level());
  const CompactMask coarse = mask2.coarsened(coarse_level);

  ExperimentReport rep;
  rep.kind = "content-distortion";
  rep.params = {{"t", p.t},
                {"K", p.K},
                {"n", static_cast<double>(p.n)},
                {"m", static_cast<double>(p.m)},
                {"eps", p.eps},
                {"premap", p.premap ? 1.0 : 0.0},
                {"phase_mode", static_cast<double>(static_cast<int>(p.phase))},
                {"seed", static_cast<double>(p.seed)},
                {"max_terms", static_cast<double>(p.max_terms)},
                {"solver_tol", p.solver_tol},
                {"norm_tol", p.norm_tol},
                {"mask_level", static_cast<double>(p.mask.level())},
                {"mask_count", static_cast<double>(p.mask.count())}};

  PackingFamily fam = packing_construct(coarse, p.t, p.eps, p.m);
  GridField layout = GridField::zeros(p.n);
  FamilyRaster raster = rasterize_family(fam, p.t, layout);

  WeightedNormReport norm_rep = weighted_norm_estimate(fam, p.t, p.n, p.norm_tol);
  const double eps0 = 1.0 / (2.0 * norm_rep.estimate);
  const double kappa = (p.K - 1.0) / (p.K + 1.0);

  GridField mu = family_coefficient(fam, raster, layout, kappa, p.phase, p.seed);
  BeltramiCoefficient bc(std::move(mu));
  PrincipalMapSolution sol = solve_principal(bc, p.max_terms, p.solver_tol);

  const Square b = mask2.bounding_square();
  Square b_torus = b;
  b_torus.center = b_torus.center + kCenterShift;
  const double diam_b = std::numbers::sqrt2 * b.side;
  const double diam_fb = image_diameter(sol, b_torus);

  const double src_content = dyadic_content(mask2, p.t);

  const int level_img = mask2.level();
  const long long sc = 1ll << level_img;
  const double inv_sc = 1.0 / static_cast<double>(sc);
  std::vector<std::array<std::uint32_t, 2>> img_px;
  const double offs[5][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}};
  for (std::size_t i = 0; i < mask2.count(); ++i) {
    const auto px = mask2.pixel(i);
    double lox = 1e300, hix = -1e300, loy = 1e300, hiy = -1e300;
    for (const auto& o : offs) {
      const Vec2 pt{(px[0] + o[0]) * inv_sc + kCenterShift.x,
                    (px[1] + o[1]) * inv_sc + kCenterShift.y};
      const cplx w = evaluate_map(sol, pt);
      const double ux = w.real() - kCenterShift.x;
      const double uy = w.imag() - kCenterShift.y;
      lox = std::min(lox, ux);
      hix = std::max(hix, ux);
      loy = std::min(loy, uy);
      hiy = std::max(hiy, uy);
    }
    mark_image_box(lox, hix, loy, hiy, sc, img_px);
  }
  const CompactMask img_mask(level_img, img_px);
  const double img_content = dyadic_content(img_mask, tprime);

  const double lhs = img_content / std::pow(diam_fb, tprime);
  const double rhs = src_content / std::pow(diam_b, p.t);
  const double expo = tprime / (p.t * p.K);
  const double implied_c = lhs / std::pow(rhs, expo);

  const double defect = conformality_defect(sol, family_region(raster, p.n));
  const double jac_frac = positive_jacobian_fraction(sol);

  rep.measured = {{"tprime", tprime},
                  {"kappa", kappa},
                  {"eps0", eps0},
                  {"norm_estimate", norm_rep.estimate},
                  {"family_norm", fam.norm},
                  {"family_count", static_cast<double>(fam.cubes.size())},
                  {"coarse_level", static_cast<double>(coarse_level)},
                  {"image_level", static_cast<double>(level_img)},
                  {"image_count", static_cast<double>(img_mask.count())},
                  {"src_content", src_content},
                  {"img_content", img_content},
                  {"diam_b", diam_b},
                  {"diam_fb", diam_fb},
                  {"lhs", lhs},
                  {"rhs", rhs},
                  {"exponent", expo},
                  {"implied_c", implied_c},
                  {"defect_outside", defect},
                  {"jac_positive_frac", jac_frac},
                  {"solver_terms", static_cast<double>(sol.terms_used)},
                  {"solver_tail", sol.tail_bound}};

  rep.bounds = {{"family_norm", 1.0 + 1e-12},
                {"kappa", eps0},
                {"defect_outside", 0.0},
                {"jac_positive_frac", 0.999}};

  const bool finite = std::isfinite(lhs) && std::isfinite(rhs) && std::isfinite(implied_c);
  rep.verdicts = {{"family_norm_le_one", fam.norm <= 1.0 + 1e-12},
                  {"kappa_admissible", kappa <= eps0 + 1e-12},
                  {"solver_converged", sol.converged},
                  {"defect_outside_zero", defect == 0.0},
                  {"jac_positive", jac_frac >= 0.999},
                  {"values_finite", finite}};

  rep.runtime_ms = elapsed_ms(t0);
  return rep;
}

}  // namespace qcm
