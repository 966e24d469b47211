#ifndef QCM_BELTRAMI_HPP
#define QCM_BELTRAMI_HPP

#include <cstdint>
#include <vector>

#include "qcm/beurling.hpp"
#include "qcm/grid.hpp"

namespace qcm {

// Dilatation datum. Construction computes kappa = max |mu| over samples and
// rejects kappa >= 1; the support must sit inside the centered unit square of
// the torus (so its images under the periodization stay far from the window
// edge).
struct BeltramiCoefficient {
  GridField mu;
  double kappa = 0.0;

  explicit BeltramiCoefficient(GridField mu_field);
};

struct PrincipalMapSolution {
  GridField fzbar;
  GridField fz;
  GridField f;               // f(z) = z + C(fzbar); samples are f values
  std::vector<double> jac;   // |fz|^2 - |fzbar|^2 per sample
  int terms_used = 0;
  double tail_bound = 0.0;   // kappa^terms / (1 - kappa)
  bool converged = false;
  std::vector<double> term_norms;  // l2 norm of each series term
};

// Neumann series for the principal solution: fzbar = mu + mu S mu + ...,
// accumulated until the latest term has l2 norm < tol * |mu|_2 or max_terms
// is hit (reported, not thrown). Then fz = 1 + S(fzbar) and f = z + C(fzbar);
// the zero-mean convention of C plays the role of the decay-at-infinity
// normalization on the torus.
PrincipalMapSolution solve_principal(const BeltramiCoefficient& mu,
                                     int max_terms, double tol);

// max |fzbar| over samples where region == 0. Region is a byte raster over
// the same grid. Zero (exactly, not just small) when mu vanishes there: every
// series term carries the factor mu pointwise.
double conformality_defect(const PrincipalMapSolution& sol,
                           const std::vector<std::uint8_t>& region);

// f evaluated off-grid: identity plus bilinear interpolation of the periodic
// displacement f - z.
cplx evaluate_map(const PrincipalMapSolution& sol, Vec2 p);

// Diameter of the image of the square boundary, sampled at grid pitch.
// A lower bound on the true diameter, converging as n grows.
double image_diameter(const PrincipalMapSolution& sol, const Square& s);
// Cube interpreted in torus coordinates; raster floor of 4 samples per side.
double image_diameter(const PrincipalMapSolution& sol, const DyadicCube& p);

}  // namespace qcm

#endif
