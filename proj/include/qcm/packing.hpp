#ifndef QCM_PACKING_HPP
#define QCM_PACKING_HPP

#include <span>
#include <vector>

#include "qcm/geometry.hpp"
#include "qcm/mask.hpp"

namespace qcm {

// Finite collection of pairwise interior-disjoint dyadic cubes, with the
// exponent and separation parameter it was built for and its packing norm.
struct PackingFamily {
  double t = 1.0;
  int m = 0;
  double norm = 0.0;
  std::vector<DyadicCube> cubes;
};

// Throws unless the cubes are distinct and pairwise nesting-free (for dyadic
// cubes that is exactly interior disjointness).
void require_disjoint(std::span<const DyadicCube> cubes);

// Minimum of sum side^t over covers of the occupied cells by dyadic cubes
// with 2^-M <= side <= 1, computed exactly by a bottom-up quadtree sweep:
// cost(Q) = 0 if Q misses the mask, else min(side(Q)^t, sum over children).
// Equals the dyadic Hausdorff content of the mask. t in (0,2].
double dyadic_content(const CompactMask& mask, double t);

// The cover realizing dyadic_content. Ties (parent cost == children sum)
// resolve to the parent, so the result prefers fewer, larger cubes. Every
// returned cube meets the mask; the union covers it; and the local property
// sum_{T inside Q} side(T)^t <= side(Q)^t holds for every dyadic Q.
std::vector<DyadicCube> minimizing_cover(const CompactMask& mask, double t);

// sup over dyadic Q of [ side(Q)^-t * sum_{P inside Q} side(P)^t ]^(1/t).
// The sup is attained at a quadtree ancestor of some family cube (pushing Q
// down to the minimal common ancestor of the cubes it contains never
// decreases the ratio), so only those are evaluated.
double t_pack_norm(std::span<const DyadicCube> cubes, double t);
double t_pack_norm(const PackingFamily& fam, double t);

// Replace each minimizing-cover cube T by its descendant of side
// 2^(-m-1)*side(T) whose upper-right corner is the center of T. Guarantees:
//   (a) the 2^m-dilations of distinct members are disjoint,
//   (b) the mask is covered by the union of 3*2^m-dilations,
//   (c) packing norm <= 1,
//   (d) sum side^t <= 9 * 2^((m+1)t) * (content + eps).
// eps is recorded for the bound but unused: the cover minimum is exact here.
PackingFamily packing_construct(const CompactMask& mask, double t, double eps,
                                int m);

// w(Q) = sum_j side(P_j)^(t-2) * area(P_j intersect Q), exact.
double weight_measure(const PackingFamily& fam, double t, const Square& q);

// The weight as an evaluable density sum_j side(P_j)^(t-2) chi_{P_j}.
struct PackingWeight {
  const PackingFamily* fam;
  double t;
  double operator()(Vec2 p) const;
  double measure(const Square& q) const { return weight_measure(*fam, t, q); }
};

// Coefficients beta_j = side_j^(t-2) * (sum_k side_k^t)^(2/t - 1).
// Identities: sum side_j^2 beta_j = (sum side_j^t)^(2/t);
// beta_j / side_j^(t-2) is constant in j; the (t/2)'-norm of {beta_j} is 1
// (negative dual exponent for t < 2).
struct BetaWeights {
  std::vector<double> beta;
};
BetaWeights beta_weights(const PackingFamily& fam, double t);

}  // namespace qcm

#endif
