#include "mccm/spectrum.hpp"

#include <cmath>

#include "mccm/errors.hpp"
#include "mccm/fft.hpp"
#include "mccm/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccm {

namespace {
constexpr double kPi = 3.14159265358979323846;
using cplx = std::complex<double>;

cplx root_of_unity(std::uint64_t num, std::uint64_t den) {
  const double ang = -2.0 * kPi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(ang), std::sin(ang)};
}

}  // namespace

std::complex<double> interval_kernel(int b, int depth, std::uint64_t s) {
  if (s == 0) return 1.0;
  const std::uint64_t period = pow_u64(static_cast<std::uint64_t>(b), depth);
  const std::uint64_t resid = s % period;
  if (resid == 0) return 0.0;
  const cplx one_minus = 1.0 - root_of_unity(resid, period);
  const double x = 2.0 * kPi * static_cast<double>(s) / static_cast<double>(period);
  // divide by i x:  (a+bi)/(ix) = (b - ai)/x
  return {one_minus.imag() / x, -one_minus.real() / x};
}

Spectrum fourier_all(const CascadeField& field, std::uint64_t kmax, bool allow_alias) {
  const std::uint64_t period = field.leaves();
  if (period > kMaxFftLeaves)
    throw Error(ErrorCode::DepthTooLarge, "FFT length beyond the supported cap");
  if (kmax == 0) kmax = period;
  if (kmax > period && !allow_alias)
    throw Error(ErrorCode::BadConfig,
                "kmax beyond one alias period; pass allow_alias to confirm");

  std::vector<cplx> data(field.masses.begin(), field.masses.end());
  const std::vector<cplx> dft = fft_pow_radix(data, field.spec.b);

  Spectrum sp;
  sp.spec = field.spec;
  sp.depth = field.depth;
  sp.seed = field.seed;
  sp.kmax = kmax;
  sp.coeffs.resize(kmax + 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t s = 0; s <= static_cast<std::int64_t>(kmax); ++s) {
    const std::uint64_t su = static_cast<std::uint64_t>(s);
    sp.coeffs[su] = interval_kernel(field.spec.b, field.depth, su) * dft[su % period];
  }
  return sp;
}

std::complex<double> fourier_at(const CascadeField& field, std::uint64_t s) {
  const std::uint64_t period = field.leaves();
  if (s == 0) return tree_sum(field.masses);
  const std::uint64_t s_red = s % period;
  cplx acc = 0.0;
  std::uint64_t idx = 0;
  for (std::uint64_t k = 0; k < period; ++k) {
    acc += field.masses[k] * root_of_unity(idx, period);
    idx += s_red;
    if (idx >= period) idx -= period;
  }
  return interval_kernel(field.spec.b, field.depth, s) * acc;
}

std::complex<double> badic_coeff(const CascadeField& field, int m) {
  if (m < 0) throw Error(ErrorCode::BadConfig, "m must be >= 0");
  if (m >= field.depth) return 0.0;
  return fourier_at(field, pow_u64(static_cast<std::uint64_t>(field.spec.b), m));
}

std::vector<std::complex<double>> restricted_coeffs(const CascadeField& field, double a, double c,
                                                    std::uint64_t kmax) {
  if (!(0.0 <= a && a < c && c <= 1.0))
    throw Error(ErrorCode::BadInterval, "need 0 <= a < c <= 1");
  const std::uint64_t period = field.leaves();
  const double pd = static_cast<double>(period);
  const std::uint64_t k_lo = static_cast<std::uint64_t>(std::floor(a * pd));
  const std::uint64_t k_hi = std::min<std::uint64_t>(
      period, static_cast<std::uint64_t>(std::ceil(c * pd)));

  std::vector<cplx> out(kmax + 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (std::int64_t s = 0; s <= static_cast<std::int64_t>(kmax); ++s) {
    cplx acc = 0.0;
    for (std::uint64_t k = k_lo; k < k_hi; ++k) {
      const double lo = std::max(a, static_cast<double>(k) / pd);
      const double hi = std::min(c, static_cast<double>(k + 1) / pd);
      if (hi <= lo) continue;
      const double density = field.masses[k] * pd;
      if (s == 0) {
        acc += density * (hi - lo);
      } else {
        // int_lo^hi e^{-2 pi i s t} dt = (e^{-2 pi i s lo} - e^{-2 pi i s hi}) / (2 pi i s)
        const double w = 2.0 * kPi * static_cast<double>(s);
        const cplx e_lo = {std::cos(w * lo), -std::sin(w * lo)};
        const cplx e_hi = {std::cos(w * hi), -std::sin(w * hi)};
        const cplx diff = e_lo - e_hi;
        acc += density * cplx{diff.imag() / w, -diff.real() / w};
      }
    }
    out[static_cast<std::uint64_t>(s)] = acc;
  }
  return out;
}

FrequencyProbe::FrequencyProbe(int b, int depth) : b_(b), depth_(depth) {
  period_ = pow_u64(static_cast<std::uint64_t>(b), depth);
  if (period_ > kDefaultLeafCap)
    throw Error(ErrorCode::DepthTooLarge, "probe table beyond the leaf cap");
  roots_.resize(period_);
  for (std::uint64_t j = 0; j < period_; ++j) roots_[j] = root_of_unity(j, period_);
}

std::complex<double> FrequencyProbe::eval(const CascadeField& field, std::uint64_t s) const {
  if (field.spec.b != b_ || field.depth != depth_)
    throw Error(ErrorCode::BadConfig, "probe built for a different (b, depth)");
  if (s == 0) return tree_sum(field.masses);
  const std::uint64_t s_red = s % period_;
  // per-block serial sums with an exact integer phase index, then a pairwise
  // tree over block results; bit-stable at any thread count
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t nblocks = (period_ + kBlock - 1) / kBlock;
  std::vector<double> re(nblocks), im(nblocks);
  const double* mass = field.masses.data();
  const cplx* roots = roots_.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
    const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kBlock;
    const std::uint64_t hi = std::min(lo + kBlock, period_);
    std::uint64_t idx = (s_red * lo) % period_;
    double sr = 0.0, si = 0.0;
    for (std::uint64_t k = lo; k < hi; ++k) {
      const double m = mass[k];
      sr += m * roots[idx].real();
      si += m * roots[idx].imag();
      idx += s_red;
      if (idx >= period_) idx -= period_;
    }
    re[static_cast<std::uint64_t>(blk)] = sr;
    im[static_cast<std::uint64_t>(blk)] = si;
  }
  return interval_kernel(b_, depth_, s) * cplx{tree_sum(re), tree_sum(im)};
}

void FrequencyProbe::eval_many(const CascadeField& field, std::span<const std::uint64_t> freqs,
                               std::complex<double>* out) const {
  if (field.spec.b != b_ || field.depth != depth_)
    throw Error(ErrorCode::BadConfig, "probe built for a different (b, depth)");
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t nblocks = (period_ + kBlock - 1) / kBlock;
  const std::size_t np = freqs.size();

  // e^{-2 pi i s (k0 + j)/P} = block phase * intra-block phase: the small
  // per-probe tables keep the inner loops sequential and vector-friendly at
  // ~1 ulp extra roundoff per block
  const std::uint64_t span = std::min<std::uint64_t>(kBlock, period_);
  std::vector<std::vector<double>> btab_re(np), btab_im(np);
  for (std::size_t p = 0; p < np; ++p) {
    const std::uint64_t s_red = freqs[p] % period_;
    btab_re[p].resize(span);
    btab_im[p].resize(span);
    std::uint64_t idx = 0;
    for (std::uint64_t j = 0; j < span; ++j) {
      btab_re[p][j] = roots_[idx].real();
      btab_im[p][j] = roots_[idx].imag();
      idx += s_red;
      if (idx >= period_) idx -= period_;
    }
  }

  std::vector<double> re(np * nblocks), im(np * nblocks);
  const double* mass = field.masses.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
    const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kBlock;
    const std::uint64_t len = std::min(lo + kBlock, period_) - lo;
    for (std::size_t p = 0; p < np; ++p) {
      const std::uint64_t s_red = freqs[p] % period_;
      const cplx phase = roots_[(s_red * lo) % period_];
      const double* tr = btab_re[p].data();
      const double* ti = btab_im[p].data();
      double sr = 0.0, si = 0.0;
      for (std::uint64_t j = 0; j < len; ++j) {
        const double m = mass[lo + j];
        sr += m * tr[j];
        si += m * ti[j];
      }
      re[p * nblocks + static_cast<std::uint64_t>(blk)] = phase.real() * sr - phase.imag() * si;
      im[p * nblocks + static_cast<std::uint64_t>(blk)] = phase.real() * si + phase.imag() * sr;
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (freqs[p] == 0) {
      out[p] = tree_sum(field.masses);
      continue;
    }
    const std::span<const double> res(re.data() + p * nblocks, nblocks);
    const std::span<const double> ims(im.data() + p * nblocks, nblocks);
    out[p] = interval_kernel(b_, depth_, freqs[p]) * cplx{tree_sum(res), tree_sum(ims)};
  }
}

}  // namespace mccm
