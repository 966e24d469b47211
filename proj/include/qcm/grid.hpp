#ifndef QCM_GRID_HPP
#define QCM_GRID_HPP

#include <complex>
#include <vector>

#include "qcm/geometry.hpp"

namespace qcm {

// Complex samples on a uniform n x n grid over the square torus
// [origin, origin + L)^2, row-major with x fastest: index iy*n + ix.
// Sample positions are the cell corners origin + (ix, iy)*h, h = L/n.
struct GridField {
  int n = 0;
  double L = 2.0;
  Vec2 origin{-1.0, -1.0};
  std::vector<cplx> v;

  double h() const { return L / n; }
  cplx& at(int ix, int iy) { return v[std::size_t(iy) * n + ix]; }
  const cplx& at(int ix, int iy) const { return v[std::size_t(iy) * n + ix]; }
  Vec2 point(int ix, int iy) const {
    return {origin.x + ix * h(), origin.y + iy * h()};
  }

  static GridField zeros(int n, double L = 2.0, Vec2 origin = {-1.0, -1.0});
};

// Throws invalid_argument naming the violated condition: n a power of two in
// [16, 8192], L > 0, sample count n*n, all samples finite.
void validate(const GridField& f);

bool same_layout(const GridField& a, const GridField& b);

double l2_norm(const GridField& f);     // plain little-l2 over samples
cplx mean(const GridField& f);

// In-place unnormalized DFT (forward: e^{-2 pi i k x}) and its inverse with
// the 1/n^2 factor applied. Plans are cached per size and reused; planning is
// serialized internally, execution is safe to run concurrently on distinct
// buffers.
void fft_forward(GridField& f);
void fft_inverse(GridField& f);

// Integer frequency for index a on an n-point ring: a, or a - n past Nyquist.
inline int freq(int a, int n) { return a < n / 2 ? a : a - n; }

}  // namespace qcm

#endif
