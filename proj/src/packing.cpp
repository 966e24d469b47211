#include "qcm/packing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace qcm {

namespace {

void check_t_open(double t) {
  if (!(t > 0.0) || !(t < 2.0))
    throw std::invalid_argument("t must be in (0,2)");
}

void check_t_half_open(double t) {
  if (!(t > 0.0 && t <= 2.0))
    throw std::invalid_argument("t must be in (0,2]");
}

double side_pow(int level, double t) { return std::exp2(-double(level) * t); }

// One quadtree level of the sparse content sweep. Nodes are the level-l
// cubes with at least one occupied descendant, in Morton order; children of
// node i occupy [child_begin[i], child_begin[i+1]) of the level below.
struct SweepLevel {
  std::vector<std::uint32_t> code;
  std::vector<double> cost;
  std::vector<std::uint8_t> take;        // parent cube chosen over children
  std::vector<std::size_t> child_begin;  // size code.size()+1; empty at leaves
};

// Bottom-up cost sweep. Sorted Morton order is preserved under code >> 2, so
// each coarser level is a single linear pass over the finer one.
std::vector<SweepLevel> content_sweep(const CompactMask& mask, double t) {
  int M = mask.level();
  std::vector<SweepLevel> levels(M + 1);

  SweepLevel& leaves = levels[M];
  leaves.code = mask.codes();
  leaves.cost.assign(leaves.code.size(), side_pow(M, t));
  leaves.take.assign(leaves.code.size(), 1);

  for (int l = M - 1; l >= 0; --l) {
    SweepLevel& up = levels[l];
    const SweepLevel& dn = levels[l + 1];
    double own = side_pow(l, t);
    std::size_t i = 0, n = dn.code.size();
    up.child_begin.push_back(0);
    while (i < n) {
      std::uint32_t pc = dn.code[i] >> 2;
      double sum = 0.0;
      while (i < n && (dn.code[i] >> 2) == pc) sum += dn.cost[i++];
      bool take = own <= sum;  // tie prefers the single coarser cube
      up.code.push_back(pc);
      up.cost.push_back(take ? own : sum);
      up.take.push_back(take);
      up.child_begin.push_back(i);
    }
  }
  return levels;
}

void walk_cover(const std::vector<SweepLevel>& levels, int l, std::size_t i,
                std::vector<DyadicCube>& out) {
  const SweepLevel& lv = levels[l];
  if (lv.take[i]) {
    auto [ix, iy] = morton_decode(lv.code[i]);
    out.push_back({l, (long long)ix, (long long)iy});
    return;
  }
  for (std::size_t c = lv.child_begin[i]; c < lv.child_begin[i + 1]; ++c)
    walk_cover(levels, l + 1, c, out);
}

struct CubeKey {
  int level;
  long long ix, iy;
  bool operator==(const CubeKey&) const = default;
};

struct CubeKeyHash {
  std::size_t operator()(const CubeKey& k) const {
    std::size_t h = std::hash<long long>()(k.ix) * 0x9e3779b97f4a7c15ull;
    h ^= std::hash<long long>()(k.iy) + 0x517cc1b727220a95ull + (h << 6);
    h ^= std::hash<int>()(k.level) + (h >> 2);
    return h;
  }
};

}  // namespace

void require_disjoint(std::span<const DyadicCube> cubes) {
  if (cubes.size() < 2) return;
  std::unordered_set<CubeKey, CubeKeyHash> seen;
  int min_level = cubes[0].level;
  for (const DyadicCube& q : cubes) min_level = std::min(min_level, q.level);
  for (const DyadicCube& q : cubes) {
    if (!seen.insert({q.level, q.ix, q.iy}).second)
      throw std::invalid_argument("family cubes must be distinct");
  }
  // Nesting <=> some cube's strict ancestor is itself a member.
  for (const DyadicCube& q : cubes) {
    for (int l = q.level - 1; l >= min_level; --l) {
      DyadicCube a = q.ancestor(l);
      if (seen.count({a.level, a.ix, a.iy}))
        throw std::invalid_argument("family cubes must have disjoint interiors");
    }
  }
}

double dyadic_content(const CompactMask& mask, double t) {
  check_t_half_open(t);
  if (mask.empty()) return 0.0;
  return content_sweep(mask, t)[0].cost[0];
}

std::vector<DyadicCube> minimizing_cover(const CompactMask& mask, double t) {
  check_t_half_open(t);
  std::vector<DyadicCube> out;
  if (mask.empty()) return out;
  auto levels = content_sweep(mask, t);
  walk_cover(levels, 0, 0, out);
  return out;
}

double t_pack_norm(std::span<const DyadicCube> cubes, double t) {
  if (!(t > 0.0))
    throw std::invalid_argument("t must be positive");
  require_disjoint(cubes);
  if (cubes.empty()) return 0.0;

  std::unordered_map<CubeKey, double, CubeKeyHash> mass;
  mass.reserve(cubes.size() * 4);
  for (const DyadicCube& q : cubes) {
    double w = side_pow(q.level, t);
    for (int l = q.level; l >= 0; --l) {
      DyadicCube a = q.ancestor(l);
      mass[{a.level, a.ix, a.iy}] += w;
    }
  }
  double best = 0.0;
  for (const auto& [key, sum] : mass)
    best = std::max(best, std::exp2(double(key.level) * t) * sum);
  return std::pow(best, 1.0 / t);
}

double t_pack_norm(const PackingFamily& fam, double t) {
  return t_pack_norm(std::span<const DyadicCube>(fam.cubes), t);
}

PackingFamily packing_construct(const CompactMask& mask, double t, double eps,
                                int m) {
  check_t_open(t);
  if (mask.empty()) throw std::invalid_argument("mask must be non-empty");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (m < 0) throw std::invalid_argument("m must be non-negative");

  PackingFamily fam;
  fam.t = t;
  fam.m = m;
  for (const DyadicCube& T : minimizing_cover(mask, t)) {
    long long step = 1ll << (m + 1);
    fam.cubes.push_back({T.level + m + 1, T.ix * step + (step / 2) - 1,
                         T.iy * step + (step / 2) - 1});
  }
  fam.norm = t_pack_norm(fam.cubes, t);
  return fam;
}

double weight_measure(const PackingFamily& fam, double t, const Square& q) {
  double total = 0.0;
  Vec2 qlo = q.lo(), qhi = q.hi();
  for (const DyadicCube& p : fam.cubes) {
    Square ps = p.square();
    Vec2 plo = ps.lo(), phi = ps.hi();
    double dx = std::min(qhi.x, phi.x) - std::max(qlo.x, plo.x);
    double dy = std::min(qhi.y, phi.y) - std::max(qlo.y, plo.y);
    if (dx > 0 && dy > 0) total += std::pow(p.side(), t - 2.0) * dx * dy;
  }
  return total;
}

double PackingWeight::operator()(Vec2 p) const {
  for (const DyadicCube& q : fam->cubes)
    if (q.square().contains(p)) return std::pow(q.side(), t - 2.0);
  return 0.0;
}

BetaWeights beta_weights(const PackingFamily& fam, double t) {
  check_t_open(t);
  if (fam.cubes.empty()) throw std::invalid_argument("family must be non-empty");
  double total = 0.0;
  for (const DyadicCube& q : fam.cubes) total += side_pow(q.level, t);
  double scale = std::pow(total, 2.0 / t - 1.0);
  BetaWeights b;
  b.beta.reserve(fam.cubes.size());
  for (const DyadicCube& q : fam.cubes)
    b.beta.push_back(std::pow(q.side(), t - 2.0) * scale);
  return b;
}

}  // namespace qcm
