#ifndef QCM_RAND_HPP
#define QCM_RAND_HPP

#include <cstdint>
#include <random>

namespace qcm {

// Draws built directly on the mt19937_64 bit stream. std::*_distribution is
// implementation-defined, so seeded runs would not reproduce across standard
// libraries; these do.
inline double uniform01(std::mt19937_64& g) {
  return double(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double a, double b) {
  return a + (b - a) * uniform01(g);
}

// Unbiased enough for test-scale ranges (modulo bias < 2^-40 for n < 2^24).
inline std::uint64_t uniform_index(std::mt19937_64& g, std::uint64_t n) {
  return g() % n;
}

}  // namespace qcm

#endif
