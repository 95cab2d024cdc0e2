#include "mccm/numeric.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mccm/errors.hpp"
#include "mccm/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccm {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MeanNotOne: return "MeanNotOne";
    case ErrorCode::ConstantWeight: return "ConstantWeight";
    case ErrorCode::NegativeAtom: return "NegativeAtom";
    case ErrorCode::ZeroMoment: return "ZeroMoment";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SeriesDiverges: return "SeriesDiverges";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::NotBoundary: return "NotBoundary";
    case ErrorCode::DepthTooLarge: return "DepthTooLarge";
    case ErrorCode::BadInterval: return "BadInterval";
    case ErrorCode::TooFewBlocks: return "TooFewBlocks";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::BadExponents: return "BadExponents";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IOError: return "IOError";
  }
  return "Unknown";
}

double inverse_normal_cdf(double p) {
  // Central region: Acklam's rational minimax (|err| ~ 1e-9, sampling-grade,
  // ~half the cost of the full-precision form). Tails: Wichura's AS 241
  // (PPND16), full double precision where the extremes live.
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p outside (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= kInverseNormalCentralHalfWidth) return inverse_normal_central(q);
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

double tree_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return tree_sum(v.first(half)) + tree_sum(v.subspan(half));
}

double blocked_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  if (nblocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(i);
    return s;
  }
  std::vector<double> partial(nblocks, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(nblocks); ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
    const std::size_t hi = std::min(lo + kBlock, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[static_cast<std::size_t>(blk)] = s;
  }
  return tree_sum(partial);
}

RootResult solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           double xtol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if ((flo > 0) == (fhi > 0))
    throw Error(ErrorCode::ConvergenceFailure, "no sign change in bracket");
  for (int it = 0; it < max_iter; ++it) {
    // secant proposal, clipped into the bracket; fall back to bisection
    double mid = 0.5 * (lo + hi);
    double x = mid;
    const double denom = fhi - flo;
    if (denom != 0.0) {
      const double sec = lo - flo * (hi - lo) / denom;
      if (sec > lo + 0.01 * (hi - lo) && sec < hi - 0.01 * (hi - lo)) x = sec;
    }
    const double fx = f(x);
    if (fx == 0.0 || hi - lo < xtol) return {x, it + 1};
    if ((fx > 0) == (fhi > 0)) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    if (hi - lo < xtol) return {0.5 * (lo + hi), it + 1};
  }
  throw Error(ErrorCode::ConvergenceFailure, "root iteration limit reached");
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  if (n < 3 || y.size() != x.size())
    throw Error(ErrorCode::TooFewBlocks, "linear fit needs at least 3 points");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::TooFewBlocks, "degenerate abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.slope_stderr = (n > 2) ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
  fit.n = n;
  return fit;
}

double inverse_power_sum(double g, double first, double step) {
  constexpr int kDirect = 24;
  double s = 0.0;
  for (int l = 0; l < kDirect; ++l) {
    const double term = std::pow(first + l * step, -g);
    s += term;
    if (term < 1e-18 * s) return s;  // large g: geometric die-off, tail negligible
  }
  // Euler-Maclaurin closure in l with dx = step and two Bernoulli terms
  const double t = first + kDirect * step;
  const double tg = std::pow(t, -g);
  s += t * tg / (step * (g - 1.0));
  s += 0.5 * tg;
  s += g * step * tg / t / 12.0;
  s -= g * (g + 1.0) * (g + 2.0) * step * step * step * tg / (t * t * t) / 720.0;
  return s;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return tree_sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return tree_sum(sq) / static_cast<double>(n - 1);
}

}  // namespace mccm
