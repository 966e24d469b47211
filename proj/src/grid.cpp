#include "qcm/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qcm {

GridField GridField::zeros(int n, double L, Vec2 origin) {
  GridField f;
  f.n = n;
  f.L = L;
  f.origin = origin;
  f.v.assign(std::size_t(n) * n, cplx{0.0, 0.0});
  validate(f);
  return f;
}

void validate(const GridField& f) {
  if (f.n < 16 || f.n > 8192 || (f.n & (f.n - 1)) != 0)
    throw std::invalid_argument("grid size must be a power of two in [16, 8192]");
  if (!(f.L > 0.0)) throw std::invalid_argument("torus side must be positive");
  if (f.v.size() != std::size_t(f.n) * f.n)
    throw std::invalid_argument("sample count must equal n*n");
  for (const cplx& z : f.v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("samples must be finite");
}

bool same_layout(const GridField& a, const GridField& b) {
  return a.n == b.n && a.L == b.L && a.origin.x == b.origin.x &&
         a.origin.y == b.origin.y;
}

double l2_norm(const GridField& f) {
  double s = 0.0;
  for (const cplx& z : f.v) s += std::norm(z);
  return std::sqrt(s);
}

cplx mean(const GridField& f) {
  cplx s{0.0, 0.0};
  for (const cplx& z : f.v) s += z;
  return s / double(f.v.size());
}

namespace {

// FFTW_ESTIMATE keeps planning deterministic (no timing-dependent choices);
// FFTW_UNALIGNED lets one cached plan serve any std::vector buffer.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<int, PlanPair>& plan_cache() {
  static std::map<int, PlanPair> cache;
  return cache;
}

PlanPair plans_for(int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> scratch(std::size_t(n) * n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair p;
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
  if (!p.fwd || !p.bwd) throw std::runtime_error("FFT planning failed");
  cache[n] = p;
  return p;
}

}  // namespace

void fft_forward(GridField& f) {
  validate(f);
  PlanPair p = plans_for(f.n);
  auto* buf = reinterpret_cast<fftw_complex*>(f.v.data());
  fftw_execute_dft(p.fwd, buf, buf);
}

void fft_inverse(GridField& f) {
  if (f.v.size() != std::size_t(f.n) * f.n)
    throw std::invalid_argument("sample count must equal n*n");
  PlanPair p = plans_for(f.n);
  auto* buf = reinterpret_cast<fftw_complex*>(f.v.data());
  fftw_execute_dft(p.bwd, buf, buf);
  double inv = 1.0 / (double(f.n) * double(f.n));
  for (cplx& z : f.v) z *= inv;
}

}  // namespace qcm
