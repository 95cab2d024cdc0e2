#ifndef MCCM_SPECTRUM_HPP
#define MCCM_SPECTRUM_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "mccm/cascade.hpp"

namespace mccm {

// Fourier coefficients mu_hat(s) = int_0^1 e^{-2 pi i s t} dmu_n(t) of a
// piecewise-constant cascade field, computed exactly: one DFT of the masses
// plus the interval kernel K_n(s), with phases reduced mod 1 in integer
// arithmetic so b-adic frequencies vanish identically.
struct Spectrum {
  ModelSpec spec;
  int depth = 0;
  std::uint64_t seed = 0;
  std::uint64_t kmax = 0;
  std::vector<std::complex<double>> coeffs;  // s = 0..kmax
};

constexpr std::uint64_t kMaxFftLeaves = std::uint64_t(1) << 22;

// K_n(s) = (1 - e^{-2 pi i s b^-n})/(2 pi i s b^-n), K_n(0) = 1; exactly zero
// at s = 0 mod b^n (s > 0).
std::complex<double> interval_kernel(int b, int depth, std::uint64_t s);

// kmax defaults to b^depth (one alias period); pass allow_alias to go beyond.
Spectrum fourier_all(const CascadeField& field, std::uint64_t kmax = 0, bool allow_alias = false);

// Direct O(b^n) evaluation; the serial oracle the FFT path is tested against.
std::complex<double> fourier_at(const CascadeField& field, std::uint64_t s);

// mu_hat_n(b^m); identically zero once m >= depth.
std::complex<double> badic_coeff(const CascadeField& field, int m);

// Exact restricted coefficients int_[a,c] e^{-2 pi i s t} dmu_n(t), s = 0..kmax.
std::vector<std::complex<double>> restricted_coeffs(const CascadeField& field, double a, double c,
                                                    std::uint64_t kmax);

// Shared root table for evaluating many coefficients of many fields of the
// same (b, depth) cheaply; bit-stable at any thread count.
class FrequencyProbe {
 public:
  FrequencyProbe(int b, int depth);
  std::complex<double> eval(const CascadeField& field, std::uint64_t s) const;
  // One pass over the masses for a batch of frequencies; bit-identical to
  // calling eval per frequency.
  void eval_many(const CascadeField& field, std::span<const std::uint64_t> freqs,
                 std::complex<double>* out) const;

 private:
  int b_;
  int depth_;
  std::uint64_t period_;
  std::vector<std::complex<double>> roots_;
};

}  // namespace mccm

#endif
