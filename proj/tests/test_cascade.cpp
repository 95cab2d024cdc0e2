#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mccm/cascade.hpp"
#include "mccm/errors.hpp"
#include "mccm/io.hpp"
#include "mccm/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mccm;

namespace {
const ModelSpec kTwoPoint{WeightModel::two_point(0.5), 2};
const ModelSpec kLogNormal{WeightModel::log_normal(0.6), 2};

ModelSpec lognormal_over(double s2_over, int b) {
  return {WeightModel::log_normal(std::sqrt(s2_over * std::log(static_cast<double>(b)))), b};
}
}  // namespace

TEST_CASE("field basics") {
  const auto f0 = sample_field(kLogNormal, 0, 7);
  CHECK(f0.masses.size() == 1);
  CHECK(f0.masses[0] == 1.0);

  const auto leb = lebesgue_fixture(2, 6);
  CHECK(leb.masses.size() == 64);
  for (double m : leb.masses) CHECK(m == doctest::Approx(1.0 / 64).epsilon(1e-15));
  CHECK(total_mass(leb) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(sample_field(lognormal_over(0.2, 3), 40, 1), Error);  // leaf cap
}

TEST_CASE("total mass is a mean-one martingale (MC)") {
  constexpr int kReps = 10000, kDepth = 10;
  std::vector<double> totals(kReps);
  for (int r = 0; r < kReps; ++r)
    totals[r] = total_mass(sample_field(kTwoPoint, kDepth, 555 ^ static_cast<std::uint64_t>(r)));
  const double se = std::sqrt(sample_variance(totals) / kReps);
  CHECK(std::fabs(mean(totals) - 1.0) < 3 * se);
}

TEST_CASE("refinement keeps the realization") {
  const auto f = sample_field(kTwoPoint, 5, 99);

  const auto same = refine(f, 0);
  CHECK(same.masses == f.masses);

  const auto deeper = refine(f, 3);
  CHECK(deeper.depth == 8);
  const auto back = restrict_depth(deeper, 5);
  CHECK(back.masses == f.masses);  // bit-for-bit: same draws, same op order

  SUBCASE("zero subtrees stay zero") {
    bool found = false;
    for (std::size_t k = 0; k < f.masses.size() && !found; ++k) {
      if (f.masses[k] == 0.0) {
        found = true;
        for (std::size_t j = k * 8; j < (k + 1) * 8; ++j) CHECK(deeper.masses[j] == 0.0);
      }
    }
    CHECK(found);  // x = 1/2 kills subtrees quickly at depth 5
  }

  SUBCASE("block sums over the refinement are the coarse mass times a mean-one factor") {
    constexpr int kReps = 2000;
    std::vector<double> ratios;
    for (int r = 0; r < kReps; ++r) {
      const auto base = sample_field(kLogNormal, 3, 1000 + r);
      const auto fine = refine(base, 2);
      double block = 0;
      for (int j = 0; j < 4; ++j) block += fine.masses[j];
      ratios.push_back(block / base.masses[0]);
    }
    const double se = std::sqrt(sample_variance(ratios) / ratios.size());
    CHECK(std::fabs(mean(ratios) - 1.0) < 3 * se);
  }
}

TEST_CASE("parallel field equals the serial reference bit-for-bit") {
  for (const auto& spec : {kTwoPoint, kLogNormal, lognormal_over(0.4, 3)}) {
    const auto a = sample_field(spec, 9, 2024);
    const auto b = sample_field_serial(spec, 9, 2024);
    CHECK(a.masses == b.masses);
  }
#ifdef _OPENMP
  SUBCASE("and is invariant under the thread count") {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = sample_field(kLogNormal, 12, 31);
    omp_set_num_threads(2);
    const auto two = sample_field(kLogNormal, 12, 31);
    omp_set_num_threads(saved);
    CHECK(one.masses == two.masses);
    CHECK(total_mass(one) == total_mass(two));
  }
#endif
}

TEST_CASE("squared martingale") {
  SUBCASE("mean one (MC)") {
    constexpr int kReps = 4000, kDepth = 8;
    std::vector<double> vals(kReps);
    for (int r = 0; r < kReps; ++r)
      vals[r] = squared_mass(sample_field(kTwoPoint, kDepth, 77 ^ static_cast<std::uint64_t>(r)));
    const double se = std::sqrt(sample_variance(vals) / kReps);
    CHECK(std::fabs(mean(vals) - 1.0) < 3 * se);
  }

  SUBCASE("recomputation route equals the mass-square identity") {
    const auto f = sample_field(kLogNormal, 10, 12345);
    const double m2 = moment(kLogNormal.weight, 2.0);
    const double via_masses = std::pow(2.0, f.depth) *
                              blocked_sum(f.masses.size(), [&](std::size_t k) {
                                return f.masses[k] * f.masses[k];
                              }) /
                              std::pow(m2, f.depth);
    CHECK(squared_mass(f) == doctest::Approx(via_masses).epsilon(1e-10));
  }

  SUBCASE("sub-critical squared martingale stabilizes in n") {
    // a.s. convergence diagnostic: level-to-level increments shrink
    const ModelSpec spec = lognormal_over(0.2, 2);  // squared sub-critical
    constexpr int kReps = 300;
    std::vector<double> early, late;
    for (int r = 0; r < kReps; ++r) {
      const auto stats = sweep_level_products(spec, 10, 40000 + r, {}, WeightTransform::SquaredNormalized);
      const auto msq = [&](int n) { return stats.sum[n] * std::pow(2.0, -n); };
      early.push_back(std::fabs(msq(3) - msq(2)));
      late.push_back(std::fabs(msq(10) - msq(9)));
    }
    CHECK(mean(late) < mean(early));
  }
}

TEST_CASE("branching walk values") {
  const ModelSpec spec = lognormal_over(1.0, 2);  // boundary case, beta = 1/sqrt 2
  const auto tr = biggins_kyprianou(spec);
  REQUIRE(tr.has_value());

  SUBCASE("E[sum e^-V] = 1 and E[sum V e^-V] = 0 (MC)") {
    // shallow depth keeps the walk's left tail mild enough for a CLT band
    constexpr int kReps = 20000, kDepth = 4;
    std::vector<double> z(kReps), d(kReps);
    for (int r = 0; r < kReps; ++r) {
      const auto f = sample_field(spec, kDepth, 909 ^ static_cast<std::uint64_t>(r));
      z[r] = partition_function(f, *tr, 1.0);
      d[r] = derivative_martingale(f, *tr);
    }
    CHECK(std::fabs(mean(z) - 1.0) < 3 * std::sqrt(sample_variance(z) / kReps));
    CHECK(std::fabs(mean(d)) < 3 * std::sqrt(sample_variance(d) / kReps));
  }

  SUBCASE("V recomputed from leaf masses agrees") {
    const auto f = sample_field(spec, 9, 4242);
    const auto v = brw_values(f, *tr);
    for (std::size_t k = 0; k < v.size(); k += 37) {
      const double log_prod = std::log(f.masses[k] * std::pow(2.0, f.depth));
      const double expected = -tr->t_star * log_prod + f.depth * tr->log_norm;
      CHECK(v[k] == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  SUBCASE("depth 0 walk is trivial") {
    const auto f = sample_field(spec, 0, 1);
    CHECK(derivative_martingale(f, *tr) == 0.0);
    CHECK(partition_function(f, *tr, 1.0) == 1.0);
  }

  SUBCASE("zero-weight leaves carry the +inf sentinel and drop out of sums") {
    const ModelSpec zspec{WeightModel::discrete({{0.0, 0.3}, {1.0, 0.4}, {2.0, 0.3}}), 3};
    const auto ztr = biggins_kyprianou(zspec);  // b P(max) = 0.9 < 1
    REQUIRE(ztr.has_value());
    const auto f = sample_field(zspec, 6, 5);
    const auto v = brw_values(f, *ztr);
    bool has_inf = false;
    for (double x : v) has_inf = has_inf || std::isinf(x);
    CHECK(has_inf);
    CHECK(std::isfinite(partition_function(f, *ztr, 1.5)));
    CHECK(std::isfinite(derivative_martingale(f, *ztr)));
  }
}

TEST_CASE("partition function ties to the squared martingale") {
  const ModelSpec spec = lognormal_over(1.0, 2);  // squared super-critical
  const auto tr = biggins_kyprianou(spec);
  const double psi_2b = psi(*tr, 2 * tr->beta);
  for (int rep = 0; rep < 5; ++rep) {
    const auto f = sample_field(spec, 9, 31337 + rep);
    const double lhs = squared_mass(f);
    const double rhs = std::exp(-f.depth * psi_2b) * partition_function(f, *tr, 2 * tr->beta);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("level sweeps match materialized fields") {
  const auto f = sample_field(kLogNormal, 8, 606);
  const auto stats = sweep_level_products(kLogNormal, 8, 606, {}, WeightTransform::Plain);
  CHECK(stats.sum[8] * std::pow(2.0, -8) == doctest::Approx(total_mass(f)).epsilon(1e-12));
  const double via_sq = blocked_sum(f.masses.size(), [&](std::size_t k) {
    return f.masses[k] * f.masses[k];
  });
  CHECK(stats.sum_sq[8] * std::pow(2.0, -16) == doctest::Approx(via_sq).epsilon(1e-12));
}

TEST_CASE("base measures") {
  const auto base = std::make_shared<BaseMeasure>(BaseMeasure::blocks(2, 1, {0.75, 0.25}));
  SUBCASE("children sum to the parent") {
    for (int level : {1, 2, 3})
      for (std::uint64_t idx = 0; idx < pow_u64(2, level); ++idx) {
        const double parent = base->cylinder_mass(level, idx);
        const double kids =
            base->cylinder_mass(level + 1, 2 * idx) + base->cylinder_mass(level + 1, 2 * idx + 1);
        CHECK(kids == doctest::Approx(parent).epsilon(1e-12));
      }
    CHECK(base->cylinder_mass(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("fields honor the base and stay linear in it") {
    const auto f = sample_field(kLogNormal, 6, 17, base);
    const auto leb = sample_field(kLogNormal, 6, 17);
    // same weights, different cylinder masses: ratio is the base density
    CHECK(f.masses[0] == doctest::Approx(leb.masses[0] * 1.5).epsilon(1e-12));
    CHECK(f.masses[63] == doctest::Approx(leb.masses[63] * 0.5).epsilon(1e-12));
  }
}

TEST_CASE("field dumps round-trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "mccm_cascade_io";
  fs::create_directories(dir);
  const auto f = sample_field(kLogNormal, 7, 2222);
  write_field_bin(f, dir / "f.bin");
  const auto g = read_field_bin(dir / "f.bin");
  CHECK(g.masses == f.masses);
  CHECK(g.depth == f.depth);
  CHECK(g.seed == f.seed);
  write_field_csv(f, dir / "f.csv");
  CHECK(fs::file_size(dir / "f.csv") > 0);
  fs::remove_all(dir);
}
