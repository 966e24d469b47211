#ifndef QCM_DISTORTION_HPP
#define QCM_DISTORTION_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcm/mask.hpp"
#include "qcm/packing.hpp"

namespace qcm {

// Image exponent t' = 2Kt / (2 + (K-1)t). Fixed points 0 and 2; increasing
// in both arguments; tau(2/(K+1), K) = 1; composition law
// tau(tau(t,K1),K2) = tau(t, K1*K2).
double tau(double t, double K);

// Endpoints of the admissible interval for 1/dim - 1/2 of the image set:
// ((1/K)(1/t - 1/2), K(1/t - 1/2)). The left endpoint equals
// 1/tau(t,K) - 1/2.
std::pair<double, double> inverse_exponent_form(double t, double K);

// Four-corner Cantor set in (1/4,3/4)^2: base square of side 1/2, each
// generation keeps the four corner squares scaled by ratio.
struct FractalSpec {
  double ratio = 0.25;  // in (0, 1/2)
  int generations = 0;
  double dimension() const;  // log 4 / log(1/ratio)
};

// Rasterization marks every level-M cell having positive-area overlap with a
// generation square. Generations below the pixel scale still mark the cells
// they meet, so deep sweeps stay usable at bounded M.
CompactMask cantor_mask(const FractalSpec& spec, int M);

struct BoxDimension {
  double dimension = 0.0;
  double std_error = 0.0;
  std::vector<std::pair<int, std::size_t>> counts;  // (k, N(2^-k))
};

// Least-squares slope of log N(2^-k) against k log 2 over k in [2, M-2].
// Needs at least three usable scales (M >= 6).
BoxDimension box_dimension(const CompactMask& mask);

// Exact affine premap x -> (x+1)/32 on the mask: five extra levels, indices
// offset by 2^M. Places any unit-square mask inside (1/32, 1/16)^2.
CompactMask shrink_into_corner(const CompactMask& mask);

enum class PhaseMode { constant, radial, random };
const char* to_string(PhaseMode m);
PhaseMode phase_mode_from_string(const std::string& s);

// One verification run. Keys are stable; runtime_ms is the only field that
// varies between identical runs.
struct ExperimentReport {
  std::string kind;
  std::map<std::string, double> params;
  std::map<std::string, double> measured;
  std::map<std::string, double> bounds;
  std::map<std::string, bool> verdicts;
  std::int64_t runtime_ms = 0;

  bool all_verdicts_pass() const;
};

struct ConformalOutsideParams {
  CompactMask mask;
  double t = 1.0;
  double K = 1.2;
  int n = 512;
  int m = 2;          // separation exponent of the construction
  double eps = 1e-9;
  PhaseMode phase = PhaseMode::radial;
  std::uint64_t seed = 1;
  int max_terms = 200;
  double solver_tol = 1e-12;
  double norm_tol = 1e-5;
};

// Packing family for the mask, a |mu| = kappa coefficient supported on it,
// the principal map, and the diameter-sum ratios plus the I1/I2/I3
// diagnostics. All preconditions are re-measured and embedded as verdicts.
ExperimentReport conformal_outside_experiment(const ConformalOutsideParams& p);

struct ContentDistortionParams {
  CompactMask mask;
  double t = 1.0;
  double K = 1.1;
  int n = 1024;
  bool premap = true;  // apply shrink_into_corner first
  int m = 2;
  double eps = 1e-9;
  PhaseMode phase = PhaseMode::radial;
  std::uint64_t seed = 1;
  int max_terms = 200;
  double solver_tol = 1e-12;
  double norm_tol = 1e-4;
};

// Invariant-form content comparison: content(fE, t') / diam(fB)^t' against
// [content(E, t) / diam(B)^t]^(t'/(tK)), B the bounding square of E. The
// Beltrami coefficient lives on the packing family of the mask coarsened to
// the deepest grid-resolvable level; the map is K-quasiconformal and
// conformal off that family, which is all the inequality requires.
ExperimentReport content_distortion_experiment(const ContentDistortionParams& p);

}  // namespace qcm

#endif
