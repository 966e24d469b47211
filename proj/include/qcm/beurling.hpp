#ifndef QCM_BEURLING_HPP
#define QCM_BEURLING_HPP

#include <cstdint>
#include <vector>

#include "qcm/geometry.hpp"
#include "qcm/grid.hpp"
#include "qcm/mask.hpp"
#include "qcm/packing.hpp"

namespace qcm {

// Fourier-multiplier transforms on the torus. The Beurling multiplier is
// conj(xi)/xi on the integer frequency lattice xi = kx + i*ky (0 at DC),
// which is the exact ratio of the d and dbar symbols at every frequency, so
// S = d o C and dbar o C = Id - mean hold to rounding error, not just
// asymptotically.
GridField beurling_apply(const GridField& f);
// Adjoint (multiplier xi/conj(xi)); inverts beurling_apply on mean-zero fields.
GridField beurling_adjoint_apply(const GridField& f);
// Spectral d/dz and d/dzbar.
GridField d_apply(const GridField& f);
GridField dbar_apply(const GridField& f);
// Cauchy transform: dbar(C g) = g - mean(g), d(C g) = S g, mean(C g) = 0.
GridField cauchy_apply(const GridField& g);

// Family cubes drawn on the grid. Cubes live in unit-square coordinates and
// are translated by `shift` onto the torus (default centers the unit square).
// Samples are assigned by the half-open convention, so each cube covers
// exactly (side/h)^2 samples and cell areas are exact.
struct FamilyRaster {
  int n = 0;
  std::vector<std::uint32_t> idx;      // covered sample indices, ascending
  std::vector<double> weight;          // side^(t-2) of the owning cube
  std::vector<std::uint32_t> cube_of;  // owning cube per covered sample
};

inline constexpr Vec2 kCenterShift{-0.5, -0.5};

// Throws if any cube has fewer than min_side samples per side (raster
// fidelity floor) or does not fit the grid window after shifting.
FamilyRaster rasterize_family(const PackingFamily& fam, double t,
                              const GridField& layout,
                              Vec2 shift = kCenterShift, int min_side = 4);

// chi_F * S(chi_F * f) where F is the union of the family cubes.
GridField compressed_apply(const GridField& f, const PackingFamily& fam,
                           Vec2 shift = kCenterShift);

struct WeightedNormReport {
  double estimate = 0.0;
  int iterations = 0;
  double residual = 0.0;  // last relative Rayleigh increment
  bool converged = false;
  double t = 0.0;
  int n = 0;
  std::size_t cube_count = 0;
};

// Operator norm of the compressed transform on L2 of the packing weight,
// estimated by power iteration on B*B where B is the conjugation of the
// compressed transform by sqrt(weight) (unitary equivalence on the support,
// so plain l2 iteration applies). Requires pairwise disjoint 3-dilations and
// packing norm <= 1. Estimates converge from below; iteration stops when the
// relative Rayleigh increment drops under tol or after max_iters rounds.
WeightedNormReport weighted_norm_estimate(const PackingFamily& fam, double t,
                                          int n, double tol,
                                          int max_iters = 500,
                                          std::uint64_t seed = 0x51e57,
                                          double L = 2.0,
                                          Vec2 origin = {-1.0, -1.0},
                                          Vec2 shift = kCenterShift);

// Combinatorial averaging operator over one shifted grid: sum over non-local
// grid cubes Q (side in [4h, L]) of chi_Q(x) * side^-2 * integral_Q f.
// Fields are treated as zero outside the grid window.
GridField sq_apply(const GridField& f, const PackingFamily& fam,
                   GridSelector sel, Vec2 shift = kCenterShift);

// Weighted maximal function over the same cubes: sup over non-local Q
// containing x of w(Q)^-1 * integral_Q g*w. Real parts are used (the maximal
// function is defined for real densities); result is real-valued.
GridField maximal_mt(const GridField& g, const PackingFamily& fam, double t,
                     GridSelector sel, Vec2 shift = kCenterShift);

}  // namespace qcm

#endif
