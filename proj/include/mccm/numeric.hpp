#ifndef MCCM_NUMERIC_HPP
#define MCCM_NUMERIC_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mccm {

// Pairwise (tree) summation with a fixed topology. Used everywhere a
// floating-point reduction feeds a result, so runs are bit-identical at
// any thread count.
double tree_sum(std::span<const double> v);

// Sums f(0..n-1) through fixed-size blocks evaluated in parallel, then a
// serial tree reduction over the block partials. Bit-stable across thread
// counts because each block is summed serially in index order.
double blocked_sum(std::size_t n, const std::function<double(std::size_t)>& f);

struct RootResult {
  double x;
  int iterations;
};

// Bracketed root finding: bisection with secant acceleration. Requires
// f(lo) and f(hi) of opposite sign.
RootResult solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                           double xtol, int max_iter = 200);

// Golden-section minimization of a unimodal function on [lo, hi].
double golden_minimize(const std::function<double(double)>& f, double lo, double hi, double xtol);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  int n = 0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// sum_{l>=0} (first + l step)^{-g} for g > 1, first > 0, step > 0: direct
// terms plus an Euler-Maclaurin closure. Stays in range for any g because no
// intermediate exceeds first^{-g}. Relative accuracy ~1e-13.
double inverse_power_sum(double g, double first, double step);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);

}  // namespace mccm

#endif
