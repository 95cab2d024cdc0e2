#include <doctest.h>

#include <cmath>

#include "mccm/cascade.hpp"
#include "mccm/errors.hpp"
#include "mccm/numeric.hpp"
#include "mccm/regimes.hpp"
#include "mccm/spectrum.hpp"

using namespace mccm;

namespace {

ModelSpec lognormal_over(double sigma_sq_over_logb, int b) {
  return {WeightModel::log_normal(std::sqrt(sigma_sq_over_logb * std::log(static_cast<double>(b)))),
          b};
}

}  // namespace

TEST_CASE("squared-regime classification") {
  CHECK(classify_squared_regime(lognormal_over(0.3, 3)) == SquaredRegime::Sub);
  CHECK(classify_squared_regime(lognormal_over(0.5, 3)) == SquaredRegime::Critical);
  CHECK(classify_squared_regime(lognormal_over(0.8, 3)) == SquaredRegime::Super);
  CHECK(classify_squared_regime({WeightModel::two_point(0.5), 4}) == SquaredRegime::Sub);
  CHECK(classify_squared_regime({WeightModel::two_point(0.6), 2}) == SquaredRegime::Sub);
}

TEST_CASE("Hausdorff dimension closed forms") {
  const double logb = std::log(3.0);
  for (double s2 : {0.1, 0.6, 1.3}) {
    const ModelSpec spec{WeightModel::log_normal(std::sqrt(s2)), 3};
    CHECK(hausdorff_dimension(spec) == doctest::Approx(1.0 - s2 / (2 * logb)).epsilon(1e-13));
  }
  CHECK(hausdorff_dimension({WeightModel::two_point(0.5), 4}) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(hausdorff_dimension({WeightModel::log_normal(1e-8), 2}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(hausdorff_dimension(lognormal_over(2.5, 3)), Error);
}

TEST_CASE("Fourier dimension, both branches") {
  CHECK(fourier_dimension(lognormal_over(0.25, 3)) == doctest::Approx(0.75).epsilon(1e-13));
  const double df = fourier_dimension(lognormal_over(1.0, 3));
  CHECK(std::fabs(df - (3.0 - 2.0 * std::sqrt(2.0))) < 1e-12);
  CHECK(fourier_dimension({WeightModel::two_point(0.5), 4}) == doctest::Approx(0.5).epsilon(1e-13));

  SUBCASE("continuity across the phase transition") {
    const double eps = 1e-6;
    const double lo = fourier_dimension(lognormal_over(0.5 - eps, 3));
    const double hi = fourier_dimension(lognormal_over(0.5 + eps, 3));
    CHECK(std::fabs(lo - hi) < 1e-5);
    CHECK(fourier_dimension(lognormal_over(0.5, 3)) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("strictly below Hausdorff except for the two-point family") {
    for (const auto& spec : {lognormal_over(0.3, 3), lognormal_over(0.9, 3),
                             ModelSpec{WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}}), 2}})
      CHECK(fourier_dimension(spec) < hausdorff_dimension(spec) - 1e-6);
    for (double x : {0.4, 0.6, 0.9})
      CHECK(std::fabs(fourier_dimension({WeightModel::two_point(x), 3}) -
                      hausdorff_dimension({WeightModel::two_point(x), 3})) < 1e-12);
  }
}

TEST_CASE("Biggins-Kyprianou transform") {
  SUBCASE("lognormal solves to the analytic beta") {
    for (int b : {2, 3, 10}) {
      const double logb = std::log(static_cast<double>(b));
      for (double s2_over : {0.3, 0.9, 1.5}) {
        const ModelSpec spec = lognormal_over(s2_over, b);
        const auto tr = biggins_kyprianou(spec);
        REQUIRE(tr.has_value());
        CHECK(std::fabs(tr->beta - spec.weight.sigma / std::sqrt(2 * logb)) < 1e-10);
        // residual of the defining equation
        const auto sf = structure_fn(spec, tr->t_star);
        CHECK(std::fabs(sf.phi_prime - sf.phi / tr->t_star) < 1e-10);
      }
    }
  }

  SUBCASE("bounded weights with b P(max) >= 1 are not in the boundary case") {
    CHECK(!biggins_kyprianou({WeightModel::two_point(0.5), 4}));
    CHECK(!biggins_kyprianou({WeightModel::two_point(0.9), 2}));
    CHECK(!biggins_kyprianou({WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}}), 2}));
  }

  SUBCASE("a bounded three-atom weight below the threshold is") {
    const ModelSpec spec{WeightModel::discrete({{4.0, 0.2}, {0.25, 0.8}}), 3};
    const auto tr = biggins_kyprianou(spec);
    REQUIRE(tr.has_value());
    const auto sf = structure_fn(spec, tr->t_star);
    CHECK(std::fabs(sf.phi_prime - sf.phi / tr->t_star) < 1e-10);
  }

  SUBCASE("the root is unique: any bracket lands on the same t*") {
    const ModelSpec spec = lognormal_over(0.7, 3);
    const auto tr = biggins_kyprianou(spec);
    const auto g = [&](double t) {
      const auto sf = structure_fn(spec, t);
      return t * sf.phi_prime - sf.phi;
    };
    const double alt = solve_bracketed(g, 1.2, 40.0, 1e-13).x;
    CHECK(std::fabs(alt - tr->t_star) < 1e-10);
  }
}

TEST_CASE("psi: normalization, convexity, closed form") {
  const ModelSpec spec = lognormal_over(0.9, 3);
  const double logb = std::log(3.0);
  const auto tr = biggins_kyprianou(spec);
  REQUIRE(tr.has_value());

  CHECK(std::fabs(psi(*tr, 1.0)) < 1e-12);
  CHECK(psi(*tr, 0.0) == doctest::Approx(logb).epsilon(1e-13));
  for (double t : {0.2, 0.5, 0.8, 1.3})
    CHECK(psi(*tr, t) == doctest::Approx((t - 1) * (t - 1) * logb).epsilon(1e-10));

  SUBCASE("psi'(1) = 0 by finite difference") {
    const double h = 1e-6;
    CHECK(std::fabs((psi(*tr, 1 + h) - psi(*tr, 1 - h)) / (2 * h)) < 1e-8);
  }

  SUBCASE("decreasing on [0,1], convex, nonnegative") {
    double prev = psi(*tr, 0.0);
    for (double t = 0.1; t <= 1.0; t += 0.1) {
      const double cur = psi(*tr, t);
      CHECK(cur < prev);
      CHECK(cur >= -1e-12);
      prev = cur;
    }
    for (double t = 0.1; t + 0.2 <= 1.4; t += 0.1)
      CHECK(psi(*tr, t + 0.1) <= 0.5 * (psi(*tr, t) + psi(*tr, t + 0.2)) + 1e-12);
  }

  SUBCASE("super-critical iff beta in (1/2, 1)") {
    const auto sub = biggins_kyprianou(lognormal_over(0.3, 3));
    CHECK(sub->beta < 0.5);
    const auto sup = biggins_kyprianou(lognormal_over(0.8, 3));
    CHECK(sup->beta > 0.5);
    CHECK(sup->beta < 1.0);
  }

  SUBCASE("Fourier dimension via the psi route matches the minimizer route") {
    for (double s2_over : {0.6, 0.8, 1.2, 1.6}) {
      const ModelSpec sp = lognormal_over(s2_over, 3);
      const auto t2 = biggins_kyprianou(sp);
      CHECK(std::fabs(fourier_dimension(sp) - 2 * psi(*t2, t2->beta) / logb) < 1e-9);
    }
    const ModelSpec disc{WeightModel::discrete({{4.0, 0.2}, {0.25, 0.8}}), 3};
    const auto t3 = biggins_kyprianou(disc);
    CHECK(std::fabs(fourier_dimension(disc) - 2 * psi(*t3, t3->beta) / logb) < 1e-9);
  }
}

TEST_CASE("Salem characterization") {
  CHECK(is_salem({WeightModel::two_point(0.6), 3}));
  CHECK(!is_salem({WeightModel::log_normal(0.5), 3}));
  CHECK(is_salem({WeightModel::discrete({{2.0, 0.5}, {0.0, 0.5}}), 4}));
  CHECK(!is_salem({WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}}), 3}));
}

TEST_CASE("varrho and varpi") {
  CHECK_THROWS_AS(varrho_varpi({WeightModel::two_point(0.5), 2}, 1e-12), Error);  // E[W^2] = b

  SUBCASE("b=4 series converges and matches a Monte Carlo cross-check") {
    const ModelSpec spec{WeightModel::two_point(0.5), 4};
    const auto vv = varrho_varpi(spec, 1e-12);
    CHECK(vv.varrho > 0);
    CHECK(!vv.varpi.has_value());

    // truncated oracle at depth 7 vs the MC mean of |mu_hat_7(1)|^2; exact by
    // martingale orthogonality at any depth
    constexpr int kDepth = 7, kReps = 3000;
    const double rho_trunc = second_moment_series(spec, 1, kDepth);
    const FrequencyProbe probe(4, kDepth);
    std::vector<double> abs2(kReps);
    for (int r = 0; r < kReps; ++r) {
      const auto field = sample_field(spec, kDepth, 1234 ^ static_cast<std::uint64_t>(r));
      abs2[r] = std::norm(probe.eval(field, 1));
    }
    const double se = std::sqrt(sample_variance(abs2) / kReps);
    CHECK(std::fabs(mean(abs2) - rho_trunc) < 3 * se);
    // the infinite series sits within its own geometric tail bound
    const double m2 = moment(spec.weight, 2.0);
    const double tail = (m2 - 1.0) / 4.0 * std::pow(m2 / 4.0, kDepth) / (1.0 - m2 / 4.0);
    CHECK(vv.varrho >= rho_trunc - 1e-15);
    CHECK(vv.varrho - rho_trunc <= tail * (1 + 1e-12));
  }

  SUBCASE("b=2 carries varpi = -2 E[(W-1)^2]/pi^2") {
    const auto vv = varrho_varpi({WeightModel::two_point(0.75), 2}, 1e-12);
    REQUIRE(vv.varpi.has_value());
    const double pi = 3.14159265358979323846;
    CHECK(*vv.varpi == doctest::Approx(-2.0 / (3.0 * pi * pi)).epsilon(1e-12));
    CHECK(vv.varrho > 0);
  }
}

TEST_CASE("second-moment series") {
  const double pi = 3.14159265358979323846;

  SUBCASE("depth 1, b=2: single term 2 E[(W-1)^2]/pi^2") {
    const ModelSpec spec{WeightModel::two_point(0.75), 2};
    const double expected = 2.0 * (4.0 / 3.0 - 1.0) / (pi * pi);
    CHECK(second_moment_series(spec, 1, 1) == doctest::Approx(expected).epsilon(1e-13));
  }

  SUBCASE("b-adic frequencies factor through the geometric scaling") {
    const ModelSpec spec = lognormal_over(0.3, 3);
    const double m2 = moment(spec.weight, 2.0);
    for (int n : {1, 2, 3}) {
      const double lhs = second_moment_series(spec, pow_u64(3, n), -1);
      const double rhs = std::pow(m2 / 3.0, n) * second_moment_series(spec, 1, -1);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }

  SUBCASE("depth 0 vanishes; divergence guard") {
    CHECK(second_moment_series(lognormal_over(0.3, 3), 5, 0) == 0.0);
    CHECK_THROWS_AS(second_moment_series(lognormal_over(1.2, 3), 1, -1), Error);  // E[W^2] > b
    CHECK_NOTHROW(second_moment_series(lognormal_over(1.2, 3), 1, 10));           // partial is fine
  }
}

TEST_CASE("eta lower bound for the cascade action") {
  SUBCASE("lognormal against the closed-form slope, flat dimension profile") {
    const int b = 3;
    const double logb = std::log(3.0);
    const double D = 0.8, kappa = 0.8;
    const auto lp = [D](double) { return D; };
    // sub-slope branch: sigma^2 <= D log b / 2
    const double s2 = 0.3 * D * logb;
    const ModelSpec spec{WeightModel::log_normal(std::sqrt(s2)), b};
    const double eta = eta_lower_bound(spec, lp, kappa);
    const double target = 0.5 * (1.0 - s2 / (D * logb)) * kappa;
    CHECK(eta <= target + 1e-9);
    CHECK(eta >= target - 3e-3);
  }

  SUBCASE("Lebesgue base reduces to the sub-critical slope") {
    const ModelSpec spec = lognormal_over(0.2, 3);
    const double eta = eta_lower_bound(spec, [](double) { return 1.0; }, 1.0);
    const double target = 0.5 * (1.0 - 0.2);
    CHECK(std::fabs(eta - target) < 2.5e-3);
  }

  SUBCASE("kappa = 0 gives nothing") {
    CHECK(eta_lower_bound(lognormal_over(0.2, 3), [](double) { return 1.0; }, 0.0) == 0.0);
  }

  SUBCASE("violated dimension assumption") {
    CHECK_THROWS_AS(
        eta_lower_bound(lognormal_over(0.8, 3), [](double) { return 0.1; }, 0.5), Error);
  }
}

TEST_CASE("dimension report composition") {
  SUBCASE("two-point reference") {
    const auto r = dimension_report({WeightModel::two_point(0.5), 4});
    CHECK(r.d_h == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r.d_f == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r.regime == SquaredRegime::Sub);
    CHECK(r.salem);
    CHECK(!r.boundary.has_value());
    CHECK(r.varrho.has_value());
    CHECK(r.lattice_log_w);
  }

  SUBCASE("super-critical lognormal at sigma^2 = log b") {
    const auto r = dimension_report(lognormal_over(1.0, 3));
    CHECK(std::fabs(r.d_f - (3.0 - 2.0 * std::sqrt(2.0))) < 1e-12);
    CHECK(r.regime == SquaredRegime::Super);
    REQUIRE(r.boundary.has_value());
    CHECK(std::fabs(r.boundary->beta - 1.0 / std::sqrt(2.0)) < 1e-10);
    CHECK(!r.salem);
    CHECK(!r.varrho.has_value());  // E[W^2] = b: series diverges, field omitted
    CHECK(!r.lattice_log_w);
  }

  SUBCASE("degenerate models throw unless explicitly allowed") {
    CHECK_THROWS_AS(dimension_report(lognormal_over(2.4, 3)), Error);
    const auto r = dimension_report(lognormal_over(2.4, 3), true);
    CHECK(!r.nondegenerate);
    CHECK(std::isnan(r.d_f));
  }
}
