// Acceptance suite: eight numbered criteria, one pass/fail line each.
// Run with no argument for all criteria, or with a number 1..8 for one.
// Every tolerance and runtime budget is pinned here, next to its check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "qcm/beltrami.hpp"
#include "qcm/beurling.hpp"
#include "qcm/distortion.hpp"
#include "qcm/grid.hpp"
#include "qcm/mask.hpp"
#include "qcm/packing.hpp"
#include "qcm/rand.hpp"

#include "disk_check.hpp"
#include "support.hpp"

using namespace qcm;
using namespace qcm_tests;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// ---------------------------------------------------------------- criterion 1
// Exponent algebra: fixed points, the threshold value, and the composition
// law to relative 1e-12 over 1e5 random triples; under 1 second.
Outcome criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xACC1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double K = uniform(g, 1.0, 10.0);
    worst = std::max(worst, std::abs(tau(2.0, K) - 2.0) / 2.0);
    worst = std::max(worst, std::abs(tau(0.0, K)));
    worst = std::max(worst, std::abs(tau(2.0 / (K + 1.0), K) - 1.0));
  }
  for (int i = 0; i < 100000; ++i) {
    const double t = uniform(g, 1e-6, 2.0);
    const double k1 = uniform(g, 1.0, 10.0);
    const double k2 = uniform(g, 1.0, 10.0);
    const double two_step = tau(tau(t, k1), k2);
    const double one_step = tau(t, k1 * k2);
    worst = std::max(worst, std::abs(two_step - one_step) / one_step);
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = worst <= 1e-12 && secs < 1.0;
  out.detail = fmt("max relative deviation %.2e over 1e5 composition triples "
                   "plus 1e3 identity checks, %.2fs",
                   worst, secs);
  return out;
}

// ---------------------------------------------------------------- criterion 2
// Content and minimizing cover against exhaustive cover enumeration: every
// mask at levels 0..2 (all 65554 of them), plus sampled masks at levels 3..6
// where the enumerated (level 3) and un-memoized recursive oracles apply.
// t in {0.5, 1.0, 1.5}; under 60 seconds.
Outcome criterion_2() {
  const auto t0 = Clock::now();
  const double ts[3] = {0.5, 1.0, 1.5};
  double worst = 0.0;
  std::size_t masks_checked = 0, cover_checks = 0;
  std::string why;

  auto check_one = [&](const CompactMask& mask, bool enumerate) -> bool {
    ++masks_checked;
    for (double t : ts) {
      const double content = dyadic_content(mask, t);
      const double recur = recursive_content(mask, t);
      worst = std::max(worst, std::abs(content - recur) / std::max(1.0, recur));
      if (std::abs(content - recur) > 1e-12 * std::max(1.0, recur)) return false;
      if (enumerate) {
        const double enumd = mask.empty() ? 0.0 : enumerated_min_cover(mask, t);
        worst = std::max(worst, std::abs(content - enumd) / std::max(1.0, enumd));
        if (std::abs(content - enumd) > 1e-12 * std::max(1.0, enumd)) return false;
      }
      ++cover_checks;
      if (!check_cover(mask, t, minimizing_cover(mask, t), &why)) return false;
    }
    return true;
  };

  Outcome out;
  // All masks at levels 0, 1, 2.
  for (int level = 0; level <= 2; ++level) {
    const std::uint32_t cells = 1u << (2 * level);
    for (std::uint64_t bits = 0; bits < (1ull << cells); ++bits) {
      std::vector<std::uint32_t> codes;
      for (std::uint32_t c = 0; c < cells; ++c)
        if (bits & (1ull << c)) codes.push_back(c);
      if (!check_one(CompactMask::from_codes(level, std::move(codes)), true)) {
        out.detail = fmt("level-%d mask #%llu: %s", level,
                         static_cast<unsigned long long>(bits),
                         why.empty() ? "content mismatch" : why.c_str());
        return out;
      }
    }
  }
  // Sampled masks at levels 3..6.
  std::mt19937_64 g(0xACC2);
  for (int level = 3; level <= 6; ++level) {
    std::vector<CompactMask> corpus;
    corpus.push_back(CompactMask::full(level));
    corpus.push_back(CompactMask::from_codes(level, {morton_encode(1, 2)}));
    for (int i = 0; i < 30; ++i)
      corpus.push_back(random_mask(g, level, uniform(g, 0.05, 0.9)));
    for (int i = 0; i < 6; ++i)
      corpus.push_back(clustered_mask(g, level, 1 + i % 3));
    for (const CompactMask& mask : corpus) {
      if (!check_one(mask, level == 3)) {
        out.detail = fmt("sampled level-%d mask failed: %s", level,
                         why.empty() ? "content mismatch" : why.c_str());
        return out;
      }
    }
  }
  const double secs = seconds_since(t0);
  out.pass = secs < 60.0;
  out.detail = fmt("%zu masks (65554 exhaustive at levels 0..2), %zu cover "
                   "validations, max oracle deviation %.2e, %.1fs",
                   masks_checked, cover_checks, worst, secs);
  return out;
}

// ---------------------------------------------------------------- criterion 3
// Construction guarantees on 200 random masks (levels 1..10) x 5 exponents x
// m in {0,1,2}: dilation disjointness, 3*2^m cover, packing norm <= 1, and
// the mass bound; zero violations, under 5 minutes.
Outcome criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xACC3);
  const double ts[5] = {0.3, 0.7, 1.0, 1.5, 1.9};
  int combos = 0, violations = 0;
  std::string first_bad;
  for (int i = 0; i < 200; ++i) {
    const int level = 1 + i % 10;
    CompactMask mask;
    if (i % 7 == 6) {
      mask = clustered_mask(g, level, 1 + int(uniform_index(g, 4)));
    } else {
      const std::size_t cap = level <= 6 ? (std::size_t(1) << 31) : 600;
      mask = random_mask(g, level, uniform(g, 0.05, 0.9), cap);
    }
    for (double t : ts) {
      for (int m = 0; m <= 2; ++m) {
        const PackingFamily fam = packing_construct(mask, t, 1e-9, m);
        const PredicateReport rep = check_construction(mask, t, 1e-9, m, fam);
        ++combos;
        if (!rep.all()) {
          ++violations;
          if (first_bad.empty())
            first_bad = fmt("mask %d level %d t %.1f m %d: %s", i, level, t, m,
                            rep.detail.c_str());
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = violations == 0 && secs < 300.0;
  out.detail = violations == 0
                   ? fmt("0 violations across %d mask/t/m combinations, %.1fs",
                         combos, secs)
                   : fmt("%d violations (first: %s)", violations, first_bad.c_str());
  return out;
}

// ---------------------------------------------------------------- criterion 4
// Transform correctness: exact isometry on mean-zero fields, and agreement
// with the principal-value quadrature on the disk indicator at n = 1024,
// 20 probes, relative 1e-2; under 30 seconds.
Outcome criterion_4() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xACC4);
  double worst_iso = 0.0;
  for (int n : {256, 1024}) {
    for (int trial = 0; trial < 10; ++trial) {
      GridField f = GridField::zeros(n);
      for (auto& z : f.v)
        z = cplx(uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0));
      const cplx mu = mean(f);
      for (auto& z : f.v) z -= mu;
      const GridField s = beurling_apply(f);
      worst_iso = std::max(worst_iso,
                           std::abs(l2_norm(s) - l2_norm(f)) / l2_norm(f));
    }
  }
  const DiskCheckResult disk = disk_check(1024);
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = worst_iso <= 1e-12 && disk.interior_err <= 1e-2 &&
             disk.exterior_err <= 1e-2 && disk.oracle_defect <= 1e-6 &&
             secs < 30.0;
  out.detail = fmt("isometry deviation %.2e; disk probes: interior %.2e, "
                   "exterior %.2e (rel), quadrature self-check %.2e; %.1fs",
                   worst_iso, disk.interior_err, disk.exterior_err,
                   disk.oracle_defect, secs);
  return out;
}

// ---------------------------------------------------------------- criterion 5
// Weighted operator norm over 50 constructed families at t = 1, n = 512:
// estimates uniformly bounded (max <= 3x median), and the max over a t-sweep
// {0.5, 1.0, 1.5} non-decreasing within 5% slack; under 10 minutes.
Outcome criterion_5() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xACC5);
  std::vector<CompactMask> masks;
  for (int i = 0; i < 50; ++i)
    masks.push_back(random_mask(g, 1 + i % 3, uniform(g, 0.15, 0.85)));

  std::vector<double> est1;
  for (const CompactMask& mask : masks) {
    const PackingFamily fam = packing_construct(mask, 1.0, 1e-9, 2);
    if (fam.norm > 1.0 + 1e-12) {
      Outcome out;
      out.detail = "construction emitted a family with packing norm > 1";
      return out;
    }
    est1.push_back(weighted_norm_estimate(fam, 1.0, 512, 1e-5).estimate);
  }
  const double med = median_of(est1);
  const double mx = *std::max_element(est1.begin(), est1.end());

  double sweep_max[3] = {0.0, 0.0, 0.0};  // t = 0.5, 1.0, 1.5
  const double sweep_t[3] = {0.5, 1.0, 1.5};
  for (int i = 0; i < 15; ++i) {
    sweep_max[1] = std::max(sweep_max[1], est1[std::size_t(i)]);
    for (int s = 0; s < 3; s += 2) {
      const PackingFamily fam = packing_construct(masks[std::size_t(i)],
                                                  sweep_t[s], 1e-9, 2);
      sweep_max[s] = std::max(
          sweep_max[s],
          weighted_norm_estimate(fam, sweep_t[s], 512, 1e-5).estimate);
    }
  }
  const double secs = seconds_since(t0);
  const bool uniform_ok = mx <= 3.0 * med;
  const bool sweep_ok = sweep_max[1] >= 0.95 * sweep_max[0] &&
                        sweep_max[2] >= 0.95 * sweep_max[1];
  Outcome out;
  out.pass = uniform_ok && sweep_ok && secs < 600.0;
  out.detail = fmt("50 estimates at t=1: max %.4f, median %.4f (ratio %.2f); "
                   "sweep maxima %.4f / %.4f / %.4f at t = 0.5 / 1.0 / 1.5; "
                   "%.0fs",
                   mx, med, mx / med, sweep_max[0], sweep_max[1], sweep_max[2],
                   secs);
  return out;
}

// ---------------------------------------------------------------- criterion 6
// Solver oracle: radial stretch recovered at K = 1.5, n = 1024 with sup
// error <= 1e-2 on 0.05 < |z| < 0.2; zero coefficient gives the identity to
// machine precision; series terms contract by at most kappa + 1e-6; under
// 2 minutes.
Outcome criterion_6() {
  const auto t0 = Clock::now();
  const double K = 1.5, kappa = (K - 1.0) / (K + 1.0), r0 = 0.25;
  const int n = 1024;
  GridField mu = GridField::zeros(n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p = mu.point(ix, iy);
      const double r = std::hypot(p.x, p.y);
      if (r >= r0) continue;
      const cplx z(p.x, p.y);
      mu.at(ix, iy) = r == 0.0 ? cplx(-kappa) : -kappa * z / std::conj(z);
    }
  const PrincipalMapSolution sol =
      solve_principal(BeltramiCoefficient(std::move(mu)), 80, 1e-12);

  double sup_err = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 p = sol.f.point(ix, iy);
      const double r = std::hypot(p.x, p.y);
      if (r <= 0.05 || r >= 0.2) continue;
      const cplx z(p.x, p.y);
      const cplx truth = z * std::pow(r / r0, 1.0 / K - 1.0);
      sup_err = std::max(sup_err, std::abs(sol.f.at(ix, iy) - truth));
    }

  double worst_ratio = 0.0;
  for (std::size_t k = 1; k < sol.term_norms.size(); ++k)
    worst_ratio = std::max(worst_ratio,
                           sol.term_norms[k] / sol.term_norms[k - 1]);

  const PrincipalMapSolution id =
      solve_principal(BeltramiCoefficient(GridField::zeros(256)), 5, 1e-12);
  double id_err = 0.0;
  for (int iy = 0; iy < 256; ++iy)
    for (int ix = 0; ix < 256; ++ix) {
      const Vec2 p = id.f.point(ix, iy);
      id_err = std::max(id_err, std::abs(id.f.at(ix, iy) - cplx(p.x, p.y)));
      id_err = std::max(id_err, std::abs(id.fz.at(ix, iy) - 1.0));
      id_err = std::max(id_err, std::abs(id.fzbar.at(ix, iy)));
    }

  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = sol.converged && sup_err <= 1e-2 &&
             worst_ratio <= kappa + 1e-6 && id_err <= 1e-15 && secs < 120.0;
  out.detail = fmt("radial-stretch sup error %.2e on the annulus (%d terms, "
                   "worst term ratio %.4f vs kappa %.1f); identity deviation "
                   "%.1e; %.0fs",
                   sup_err, sol.terms_used, worst_ratio, kappa, id_err, secs);
  return out;
}

// ---------------------------------------------------------------- criterion 7
// Proof-chain inequalities on 20 conformal-outside instances with
// kappa <= 0.15: I3 <= I1, the derivative identity holds to 1e-9, and the
// diameter-sum ratio is finite and uniform (max <= 3x median); under
// 15 minutes.
Outcome criterion_7() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(0xACC7);
  const PhaseMode phases[3] = {PhaseMode::radial, PhaseMode::random,
                               PhaseMode::constant};
  std::vector<double> ratios;
  double worst_identity = 0.0, worst_i3_slack = 0.0;
  bool verdicts_ok = true, finite_ok = true;
  std::string first_bad;
  for (int i = 0; i < 20; ++i) {
    const bool fine = i >= 10;
    ConformalOutsideParams p;
    p.mask = random_mask(g, fine ? 4 : 3, fine ? 0.15 : 0.3);
    p.n = fine ? 1024 : 512;
    const double kappa = 0.05 + 0.10 * double(i) / 19.0;
    p.K = (1.0 + kappa) / (1.0 - kappa);
    p.phase = phases[i % 3];
    p.seed = 1000 + std::uint64_t(i);
    const ExperimentReport rep = conformal_outside_experiment(p);
    if (!rep.all_verdicts_pass()) {
      verdicts_ok = false;
      if (first_bad.empty()) {
        first_bad = fmt("instance %d", i);
        for (const auto& [k, v] : rep.verdicts)
          if (!v) first_bad += " " + k;
      }
    }
    worst_identity = std::max(worst_identity,
                              rep.measured.at("identity_residual"));
    worst_i3_slack = std::max(worst_i3_slack, rep.measured.at("i3") -
                                                  rep.measured.at("i1"));
    const double ratio = rep.measured.at("ratio_side");
    finite_ok = finite_ok && std::isfinite(ratio);
    ratios.push_back(ratio);
  }
  const double med = median_of(ratios);
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = verdicts_ok && finite_ok && worst_i3_slack <= 1e-12 &&
             worst_identity <= 1e-9 && mx <= 3.0 * med && secs < 900.0;
  out.detail = fmt("20 instances: max(I3-I1) %.1e, identity residual %.1e, "
                   "diameter-sum ratio max %.3f vs median %.3f (ratio %.2f); "
                   "%.0fs%s%s",
                   worst_i3_slack, worst_identity, mx, med, mx / med, secs,
                   first_bad.empty() ? "" : "; failed verdicts: ",
                   first_bad.c_str());
  return out;
}

// ---------------------------------------------------------------- criterion 8
// Content-distortion trend over corner-set generations g = 4..8 at r = 1/4,
// t = 1, K = 1.1, n = 1024: image content must decrease monotonically as the
// source content goes to zero, and the exponent fitted to the invariant
// forms must land within 25% of t'/(tK); under 20 minutes.
//
// For this family the source side of the comparison is scale-invariant:
// at r = 1/4 and t = 1 every generation step replaces a cover square by four
// squares whose cost sum equals the parent cost exactly (4 * 1/4 = 1), so
// the minimizing cover never descends and the source content is the same
// number for every g. The premise "source content -> 0" is unreachable and
// the exponent fit has zero variance in the abscissa. The criterion is
// reported as stated, with the degeneracy measured and a companion sweep at
// r = 1/16 (where 4 * r < 1 gives genuine decay) demonstrating that the
// trend machinery itself recovers the predicted exponent.
Outcome criterion_8() {
  const auto t0 = Clock::now();
  auto run = [](double ratio, int gens, int M, bool premap) {
    ContentDistortionParams p;
    p.mask = cantor_mask(FractalSpec{ratio, gens}, M);
    p.t = 1.0;
    p.K = 1.1;
    p.n = 1024;
    p.premap = premap;
    return content_distortion_experiment(p);
  };
  const double target = tau(1.0, 1.1) / (1.0 * 1.1);

  std::vector<double> lhs, rhs, img, src;
  bool verdicts_ok = true;
  for (int gen = 4; gen <= 8; ++gen) {
    const ExperimentReport rep = run(0.25, gen, 11, true);
    verdicts_ok = verdicts_ok && rep.all_verdicts_pass();
    lhs.push_back(rep.measured.at("lhs"));
    rhs.push_back(rep.measured.at("rhs"));
    img.push_back(rep.measured.at("img_content"));
    src.push_back(rep.measured.at("src_content"));
  }
  bool weak_mono = true, strict_mono = true;
  for (std::size_t i = 1; i < img.size(); ++i) {
    if (img[i] > img[i - 1] * (1.0 + 1e-12)) weak_mono = false;
    if (img[i] >= img[i - 1] * (1.0 - 1e-12)) strict_mono = false;
  }
  // Least-squares exponent of ln(lhs) against ln(rhs).
  const std::size_t np = lhs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < np; ++i) {
    const double x = std::log(rhs[i]), y = std::log(lhs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double varx = sxx - sx * sx / double(np);
  const bool fit_defined = varx > 1e-12;
  const double slope = fit_defined ? (sxy - sx * sy / double(np)) / varx : 0.0;
  const bool fit_ok = fit_defined && std::abs(slope / target - 1.0) <= 0.25;

  Outcome out;
  out.notes.push_back(fmt(
      "source content is the same for every generation (measured %.9g at "
      "g=4..8; 4 squares at ratio 1/4 tie the cover at t=1), so the abscissa "
      "has zero variance (%.1e) and no exponent can be fitted",
      src[0], varx));
  out.notes.push_back(fmt(
      "image content across g=4..8: %.6g %.6g %.6g %.6g %.6g "
      "(non-increasing: %s; strictly decreasing: %s)",
      img[0], img[1], img[2], img[3], img[4], weak_mono ? "yes" : "no",
      strict_mono ? "yes" : "no"));

  // Companion sweep where the source content genuinely decays: ratio 1/16
  // (4 * 1/16 < 1, so covers descend), with the mask level scaled as 4g + 4
  // so the generation-g features stay exactly 8 pixels wide and the image
  // content is measured with the same relative resolution at every step.
  std::vector<double> clhs, crhs;
  bool comp_ok = true;
  for (int gen = 1; gen <= 3; ++gen) {
    const ExperimentReport rep = run(0.0625, gen, 4 * gen + 4, false);
    comp_ok = comp_ok && rep.all_verdicts_pass();
    clhs.push_back(rep.measured.at("lhs"));
    crhs.push_back(rep.measured.at("rhs"));
  }
  double cx = 0, cy = 0, cxx = 0, cxy = 0;
  for (std::size_t i = 0; i < clhs.size(); ++i) {
    const double x = std::log(crhs[i]), y = std::log(clhs[i]);
    cx += x;
    cy += y;
    cxx += x * x;
    cxy += x * y;
  }
  const double cvarx = cxx - cx * cx / 3.0;
  const double cslope = cvarx > 1e-12 ? (cxy - cx * cy / 3.0) / cvarx : 0.0;
  out.notes.push_back(fmt(
      "companion sweep r=1/16, g=1..3 at matched feature resolution "
      "(decaying source content): fitted exponent %.4f vs target t'/(tK) = "
      "%.4f, ratio %.3f (within 25%%: %s; all run verdicts pass: %s)",
      cslope, target, cslope / target,
      std::abs(cslope / target - 1.0) <= 0.25 ? "yes" : "no",
      comp_ok ? "yes" : "no"));

  const double secs = seconds_since(t0);
  out.pass = verdicts_ok && strict_mono && fit_ok && secs < 1200.0;
  out.detail = fmt("image content non-increasing: %s, strictly decreasing: "
                   "%s; exponent fit %s (target %.4f); %.0fs",
                   weak_mono ? "yes" : "no", strict_mono ? "yes" : "no",
                   fit_defined ? fmt("slope %.4f", slope).c_str()
                               : "undefined (zero abscissa variance)",
                   target, secs);
  return out;
}

struct Criterion {
  const char* name;
  Outcome (*fn)();
};

const Criterion kCriteria[8] = {
    {"exponent algebra", criterion_1},
    {"packing oracle equivalence", criterion_2},
    {"construction guarantees", criterion_3},
    {"transform correctness", criterion_4},
    {"weighted norm bound", criterion_5},
    {"solver oracle", criterion_6},
    {"proof-chain inequalities", criterion_7},
    {"content-distortion trend", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
  int lo = 1, hi = 8;
  if (argc > 1) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > 8) {
      std::fprintf(stderr, "usage: %s [criterion 1..8]\n", argv[0]);
      return 2;
    }
    lo = hi = k;
  }
  int failures = 0;
  for (int k = lo; k <= hi; ++k) {
    Outcome out;
    try {
      out = kCriteria[k - 1].fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%d/8] %s %s: %s\n", k, out.pass ? "PASS" : "FAIL",
                kCriteria[k - 1].name, out.detail.c_str());
    for (const std::string& n : out.notes)
      std::printf("      note: %s\n", n.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
