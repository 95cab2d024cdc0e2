#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "mccm/errors.hpp"
#include "mccm/rng.hpp"
#include "mccm/numeric.hpp"
#include "mccm/weights.hpp"

using namespace mccm;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an Error");
}

}  // namespace

TEST_CASE("validate accepts and rejects per the invariants") {
  CHECK_NOTHROW(validate(WeightModel::two_point(0.5)));
  CHECK(code_of([] { validate(WeightModel::discrete({{1.0, 1.0}})); }) == ErrorCode::ConstantWeight);
  CHECK(code_of([] { validate(WeightModel::discrete({{2.0, 0.6}, {0.0, 0.4}})); }) ==
        ErrorCode::MeanNotOne);
  CHECK(code_of([] { validate(WeightModel::discrete({{-1.0, 0.5}, {3.0, 0.5}})); }) ==
        ErrorCode::NegativeAtom);
  CHECK(code_of([] { validate(WeightModel::two_point(1.0)); }) == ErrorCode::ConstantWeight);
  CHECK(code_of([] { validate(WeightModel::log_normal(0.0)); }) == ErrorCode::ConstantWeight);
  // mean 1 but probabilities short of a distribution
  CHECK(code_of([] { validate(WeightModel::discrete({{2.0, 0.5}})); }) == ErrorCode::BadConfig);
}

TEST_CASE("moments: exact closed forms") {
  const auto ln06 = WeightModel::log_normal(0.6);
  const auto tp05 = WeightModel::two_point(0.5);
  const auto disc = WeightModel::discrete({{0.5, 0.4}, {1.0, 0.4}, {2.0, 0.2}});

  for (const auto& m : {ln06, tp05, disc}) CHECK(moment(m, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moment(ln06, 2.0) == doctest::Approx(std::exp(0.36)).epsilon(1e-14));
  CHECK(moment(tp05, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(moment(tp05, 3.5) == doctest::Approx(std::pow(0.5, 1.0 - 3.5)).epsilon(1e-14));
  CHECK(moment(tp05, 0.0) == 1.0);  // 0^0 = 1 keeps E[W^0] = 1
}

TEST_CASE("moment cross-check by Monte Carlo mean of W^2") {
  const auto m = WeightModel::log_normal(0.6);
  constexpr int kN = 1000000;
  std::vector<double> w2(kN);
  for (int i = 0; i < kN; ++i) {
    const double w = sample_weight(m, 99, static_cast<std::uint64_t>(i) + 1);
    w2[i] = w * w;
  }
  const double mc = mean(w2);
  const double se = std::sqrt(sample_variance(w2) / kN);
  CHECK(std::fabs(mc - std::exp(0.36)) < 3 * se);
}

TEST_CASE("mean_w_log_w closed forms and the small-spread limit") {
  CHECK(mean_w_log_w(WeightModel::log_normal(1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mean_w_log_w(WeightModel::two_point(0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double eps = 1e-3;
  const double v = mean_w_log_w(WeightModel::discrete({{1.0 + eps, 0.5}, {1.0 - eps, 0.5}}));
  CHECK(v > 0.0);
  CHECK(v == doctest::Approx(eps * eps).epsilon(0.01));
}

TEST_CASE("structure function and its derivative") {
  const ModelSpec ln{WeightModel::log_normal(0.8), 3};
  const ModelSpec tp{WeightModel::two_point(0.4), 3};
  const double logb = std::log(3.0);

  CHECK(structure_fn(ln, 1.0).phi == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(structure_fn(tp, 1.0).phi == doctest::Approx(0.0).epsilon(1e-14));
  for (double t : {0.3, 0.9, 1.7, 2.5}) {
    const double s2 = 0.64;
    CHECK(structure_fn(ln, t).phi ==
          doctest::Approx((t - 1.0) * (s2 * t / 2.0 - logb)).epsilon(1e-12));
  }
  CHECK(structure_fn(tp, 2.0).phi == doctest::Approx(std::log(1.0 / 0.4) - logb).epsilon(1e-12));

  // phi at sigma^2 = log b vanishes at t = 2
  const ModelSpec crit{WeightModel::log_normal(std::sqrt(logb)), 3};
  CHECK(structure_fn(crit, 2.0).phi == doctest::Approx(0.0).epsilon(1e-12));

  SUBCASE("phi convex on a grid") {
    for (const auto& spec : {ln, tp}) {
      for (double t1 = 0.2; t1 < 3.0; t1 += 0.4) {
        for (double t2 = t1 + 0.4; t2 < 3.4; t2 += 0.4) {
          const double mid = structure_fn(spec, 0.5 * (t1 + t2)).phi;
          const double chord = 0.5 * (structure_fn(spec, t1).phi + structure_fn(spec, t2).phi);
          CHECK(mid <= chord + 1e-10);
        }
      }
    }
  }

  SUBCASE("phi_prime equals the central finite difference") {
    const double h = 1e-5;
    for (const auto& spec : {ln, tp}) {
      for (double t : {0.5, 1.0, 1.9, 2.8}) {
        const double fd = (structure_fn(spec, t + h).phi - structure_fn(spec, t - h).phi) / (2 * h);
        const auto sf = structure_fn(spec, t);
        CHECK(sf.phi_prime == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("mean_w_log_w equals d/dt log moment at t=1") {
  const double h = 1e-5;
  for (const auto& m : {WeightModel::log_normal(0.7), WeightModel::two_point(0.3),
                        WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}})}) {
    const double fd = (std::log(moment(m, 1 + h)) - std::log(moment(m, 1 - h))) / (2 * h);
    CHECK(mean_w_log_w(m) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("non-degeneracy and Lp conditions") {
  const auto c1 = check_conditions({WeightModel::two_point(0.5), 4}, 2.0);
  CHECK(c1.nondegenerate);
  CHECK(c1.lp_bounded);  // E[W^2] = 2 < 4

  const double logb = std::log(3.0);
  const auto c2 = check_conditions({WeightModel::log_normal(std::sqrt(2.0 * logb)), 3}, 2.0);
  CHECK(!c2.nondegenerate);  // sigma^2 = 2 log b sits on the boundary

  const double x = 1.0 / 3.0 + 1e-12;
  CHECK(check_conditions({WeightModel::two_point(x), 3}, 1.5).nondegenerate);
}

TEST_CASE("sampler: determinism and marginal law") {
  const auto tp = WeightModel::two_point(0.5);
  CHECK(sample_weight(tp, 7, 123) == sample_weight(tp, 7, 123));
  // streams decouple (visible on a continuous law; two-point values may tie)
  const auto ln1 = WeightModel::log_normal(0.8);
  CHECK(sample_weight(ln1, 7, 123, 1) != sample_weight(ln1, 7, 123, 2));

  SUBCASE("two-point frequency within the binomial interval") {
    constexpr int kN = 1000000;
    int hits = 0;
    for (int i = 0; i < kN; ++i)
      if (sample_weight(tp, 11, static_cast<std::uint64_t>(i) + 1) > 0) ++hits;
    CHECK(std::fabs(hits / static_cast<double>(kN) - 0.5) < 0.002);
  }

  SUBCASE("lognormal mean within 3 standard errors") {
    const auto ln = WeightModel::log_normal(0.8);
    constexpr int kN = 1000000;
    std::vector<double> w(kN);
    for (int i = 0; i < kN; ++i) w[i] = sample_weight(ln, 5, static_cast<std::uint64_t>(i) + 1);
    const double se = std::sqrt(sample_variance(w) / kN);
    CHECK(std::fabs(mean(w) - 1.0) < 3 * se);
  }

  SUBCASE("discrete frequencies match the atom table") {
    const auto d = WeightModel::discrete({{0.5, 0.4}, {1.0, 0.4}, {2.0, 0.2}});
    constexpr int kN = 200000;
    int n_half = 0;
    for (int i = 0; i < kN; ++i)
      if (sample_weight(d, 3, static_cast<std::uint64_t>(i) + 1) == 0.5) ++n_half;
    CHECK(std::fabs(n_half / static_cast<double>(kN) - 0.4) < 0.004);
  }
}

TEST_CASE("sampler exp stays within a few ulp of the libm value") {
  double worst = 0;
  for (int i = 0; i < 200000; ++i) {
    const double x = -690.0 + 1380.0 * uniform_open01(keyed_hash(17, i + 1, 0));
    worst = std::max(worst, std::fabs(sampler_exp(x) - std::exp(x)) / std::exp(x));
  }
  CHECK(worst < 1e-13);
  CHECK(sampler_exp(-1000.0) == 0.0);
  CHECK(std::isinf(sampler_exp(1000.0)));
}

TEST_CASE("lattice diagnostic") {
  CHECK(is_lattice_log(WeightModel::two_point(0.5)));
  CHECK(!is_lattice_log(WeightModel::log_normal(0.5)));
  CHECK(is_lattice_log(WeightModel::discrete({{0.5, 0.4}, {1.0, 0.4}, {2.0, 0.2}})));
  const double e = std::exp(1.0);
  const double c = 0.1, a = 2.0 * c * (e - 1.0), b = 0.9 - a;
  CHECK(!is_lattice_log(WeightModel::discrete({{0.5, a}, {1.0, b}, {e, c}})));
}

TEST_CASE("two-point law recognition across representations") {
  double x = 0;
  CHECK(matches_two_point_law(WeightModel::discrete({{2.0, 0.5}, {0.0, 0.5}}), &x));
  CHECK(x == doctest::Approx(0.5));
  CHECK(!matches_two_point_law(WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}})));
  CHECK(!matches_two_point_law(WeightModel::log_normal(1.0)));
}

TEST_CASE("model json round trip") {
  for (const auto& m : {WeightModel::log_normal(0.8), WeightModel::two_point(0.5),
                        WeightModel::discrete({{0.0, 0.25}, {4.0 / 3, 0.75}})}) {
    const auto copy = WeightModel::from_json(m.to_json());
    CHECK(copy.kind == m.kind);
    CHECK(moment(copy, 2.0) == moment(m, 2.0));
  }
}
