#ifndef MCCM_RNG_HPP
#define MCCM_RNG_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mccm {

// Counter-based generator: every variate is a pure function of
// (seed, node, stream). No state, so tree nodes can be sampled in any
// order, on any number of threads, with identical results.

inline std::uint64_t avalanche64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t keyed_hash(std::uint64_t seed, std::uint64_t node, std::uint64_t stream) {
  std::uint64_t z = avalanche64(seed ^ (node * 0x9e3779b97f4a7c15ULL));
  return avalanche64(z ^ (stream * 0xd1b54a32d192ed03ULL));
}

// Uniform in the open interval (0,1); never returns an endpoint, which the
// inverse-CDF mappings rely on.
inline double uniform_open01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse of the standard normal CDF: Acklam's central rational
// (sampling-grade) with full-precision AS 241 tails.
double inverse_normal_cdf(double p);

// The branch-free central piece, valid for |q| = |p - 1/2| within the half
// width below. Shared by the scalar CDF and the batched field generator so
// both produce bit-identical draws.
constexpr double kInverseNormalCentralHalfWidth = 0.47575;

inline double inverse_normal_central(double q) {
  const double r = q * q;
  return q *
         (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r -
             2.759285104469687e+02) * r + 1.383577518672690e+02) * r -
           3.066479806614716e+01) * r + 2.506628277459239e+00) /
         (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r -
             1.556989798598866e+02) * r + 6.680131188771972e+01) * r -
           1.328068155288572e+01) * r + 1.0);
}

// exp() for the sampling hot path: 2^{k + j/64} e^r with a 64-entry table and
// a short polynomial on |r| <= log(2)/128, a few ulp. One scalar code path,
// so serial and parallel samplers stay bit-identical.
inline const std::array<double, 64> kSamplerExpTable = [] {
  std::array<double, 64> t{};
  for (int i = 0; i < 64; ++i) t[i] = std::exp2(i / 64.0);
  return t;
}();

inline double sampler_exp(double x) {
  if (x < -708.0) return 0.0;
  if (x > 708.0) return std::numeric_limits<double>::infinity();
  const double kd = x * 92.332482616893657 + 6755399441055744.0;  // 64/ln2; magic rounds to int
  const auto n = static_cast<std::int32_t>(std::bit_cast<std::int64_t>(kd) & 0xffffffff);
  const double nd = kd - 6755399441055744.0;
  const double r = (x - nd * 0.0108304246932675596327) - nd * 2.98158582698529328128e-12;
  const int j = n & 63;
  const std::int64_t k = n >> 6;
  const double p = 1.0 + r * (1.0 + r * (0.5 + r * (1.0 / 6.0 + r * (1.0 / 24.0))));
  const std::int64_t bits = (k + 1023) << 52;
  return std::bit_cast<double>(bits) * kSamplerExpTable[static_cast<std::size_t>(j)] * p;
}

}  // namespace mccm

#endif
