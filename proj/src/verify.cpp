#include "mccm/verify.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mccm/cascade.hpp"
#include "mccm/errors.hpp"
#include "mccm/estimators.hpp"
#include "mccm/io.hpp"
#include "mccm/numeric.hpp"
#include "mccm/regimes.hpp"
#include "mccm/spectrum.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccm {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct StatsSink {
  std::vector<std::string> rows;
  void add(int crit, const std::string& name, double value) {
    rows.push_back("c" + std::to_string(crit) + "," + name + "," + format_double(value));
  }
};

ModelSpec lognormal_spec(double sigma_sq_over_logb, int b) {
  const double logb = std::log(static_cast<double>(b));
  return {WeightModel::log_normal(std::sqrt(sigma_sq_over_logb * logb)), b};
}

// ---- criterion 1: closed-form log-normal dimensions -------------------------

CriterionResult crit_lognormal_closed_form(StatsSink& sink, std::vector<std::string>& sweep_rows) {
  const auto t0 = clock_type::now();
  double worst = 0.0, worst_kink = 0.0;
  for (int b : {2, 3, 10}) {
    const double logb = std::log(static_cast<double>(b));
    for (int i = 1; i <= 25; ++i) {
      const double sigma = std::sqrt(2.0 * logb) * i / 26.0;
      const ModelSpec spec{WeightModel::log_normal(sigma), b};
      const double s2 = sigma * sigma;
      const double expected = (s2 / logb <= 0.5) ? 1.0 - s2 / logb
                                                 : 2.0 * std::pow(1.0 - sigma / std::sqrt(2.0 * logb), 2);
      const double got = fourier_dimension(spec);
      worst = std::max(worst, std::fabs(got - expected));
      std::ostringstream row;
      row << b << ',' << format_double(sigma) << ',' << format_double(hausdorff_dimension(spec))
          << ',' << format_double(got);
      sweep_rows.push_back(row.str());
    }
    // continuity at the second-order phase transition
    const double sk = std::sqrt(logb / 2.0);
    const double sub_branch = 1.0 - sk * sk / logb;
    const double super_branch = 2.0 * std::pow(1.0 - sk / std::sqrt(2.0 * logb), 2);
    worst_kink = std::max(worst_kink, std::fabs(sub_branch - super_branch));
    worst_kink = std::max(
        worst_kink, std::fabs(fourier_dimension({WeightModel::log_normal(sk), b}) - 0.5));
  }
  sink.add(1, "max_branch_err", worst);
  sink.add(1, "max_kink_err", worst_kink);
  CriterionResult r{1, "lognormal closed-form dimensions", worst <= 1e-12 && worst_kink <= 1e-12,
                    "max_err=" + format_double(worst) + " kink_err=" + format_double(worst_kink),
                    0, 1.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 2: Salem characterization ------------------------------------

CriterionResult crit_salem(StatsSink& sink) {
  const auto t0 = clock_type::now();
  const std::vector<ModelSpec> two_point = {
      {WeightModel::two_point(0.30), 4}, {WeightModel::two_point(0.50), 4},
      {WeightModel::two_point(0.75), 4}, {WeightModel::two_point(0.90), 4},
      {WeightModel::two_point(0.26), 4}, {WeightModel::two_point(0.60), 2},
      {WeightModel::two_point(0.51), 2}, {WeightModel::two_point(0.80), 3},
      {WeightModel::two_point(0.99), 3}, {WeightModel::two_point(0.35), 5}};
  const std::vector<ModelSpec> other = {
      lognormal_spec(0.20, 3), lognormal_spec(0.50, 3), lognormal_spec(0.80, 3),
      lognormal_spec(1.20, 3), lognormal_spec(1.70, 3), lognormal_spec(0.50, 2),
      lognormal_spec(0.35, 10),
      {WeightModel::discrete({{0.5, 0.5}, {1.5, 0.5}}), 2},
      {WeightModel::discrete({{4.0, 0.2}, {0.25, 0.8}}), 3},
      {WeightModel::discrete({{2.0, 0.3}, {1.0, 0.2}, {0.5, 0.4}, {0.0, 0.1}}), 3}};
  double worst_equal = 0.0, best_gap = 1.0;
  bool salem_flags = true;
  for (const auto& spec : two_point) {
    worst_equal = std::max(worst_equal,
                           std::fabs(fourier_dimension(spec) - hausdorff_dimension(spec)));
    salem_flags = salem_flags && is_salem(spec);
  }
  for (const auto& spec : other) {
    best_gap = std::min(best_gap, hausdorff_dimension(spec) - fourier_dimension(spec));
    salem_flags = salem_flags && !is_salem(spec);
  }
  sink.add(2, "max_twopoint_gap", worst_equal);
  sink.add(2, "min_other_gap", best_gap);
  CriterionResult r{2, "Salem characterization", worst_equal <= 1e-12 && best_gap > 1e-6 && salem_flags,
                    "twopoint_gap=" + format_double(worst_equal) +
                        " min_other_gap=" + format_double(best_gap),
                    0, 1.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 3: Biggins-Kyprianou transform -------------------------------

CriterionResult crit_bk_transform(StatsSink& sink) {
  const auto t0 = clock_type::now();
  double worst_beta = 0.0, worst_psi_route = 0.0;
  bool two_point_ok = true;
  for (int b : {2, 3, 10}) {
    const double logb = std::log(static_cast<double>(b));
    for (double ratio : {0.3, 1.0, 1.6}) {
      const ModelSpec spec = lognormal_spec(ratio, b);
      const auto tr = biggins_kyprianou(spec);
      if (!tr) {
        two_point_ok = false;
        continue;
      }
      const double analytic = spec.weight.sigma / std::sqrt(2.0 * logb);
      worst_beta = std::max(worst_beta, std::fabs(tr->beta - analytic));
    }
  }
  two_point_ok = two_point_ok && !biggins_kyprianou({WeightModel::two_point(0.5), 4}) &&
                 !biggins_kyprianou({WeightModel::two_point(0.9), 2});
  std::vector<ModelSpec> supers = {lognormal_spec(0.8, 3), lognormal_spec(1.2, 3),
                                   lognormal_spec(1.5, 2),
                                   {WeightModel::discrete({{4.0, 0.2}, {0.25, 0.8}}), 3}};
  for (const auto& spec : supers) {
    const auto tr = biggins_kyprianou(spec);
    const double via_psi = 2.0 * psi(*tr, tr->beta) / std::log(static_cast<double>(spec.b));
    worst_psi_route = std::max(worst_psi_route, std::fabs(fourier_dimension(spec) - via_psi));
  }
  sink.add(3, "max_beta_err", worst_beta);
  sink.add(3, "max_psi_route_err", worst_psi_route);
  CriterionResult r{3, "Biggins-Kyprianou transform",
                    worst_beta <= 1e-10 && two_point_ok && worst_psi_route <= 1e-9,
                    "beta_err=" + format_double(worst_beta) +
                        " psi_route_err=" + format_double(worst_psi_route),
                    0, 1.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criteria 4 & 5: exact second moments and b-adic scaling ----------------

struct MomentMc {
  std::vector<double> mc_mean, mc_stderr;  // per frequency
};

MomentMc mc_second_moments(const ModelSpec& spec, int depth, int reps,
                           const std::vector<std::uint64_t>& s_list, std::uint64_t seed) {
  const FrequencyProbe probe(spec.b, depth);
  std::vector<std::vector<double>> abs2(s_list.size(), std::vector<double>(reps));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < reps; ++r) {
    const CascadeField field = sample_field(spec, depth, seed ^ static_cast<std::uint64_t>(r));
    std::vector<std::complex<double>> vals(s_list.size());
    probe.eval_many(field, s_list, vals.data());
    for (std::size_t i = 0; i < s_list.size(); ++i) abs2[i][r] = std::norm(vals[i]);
  }
  MomentMc out;
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    out.mc_mean.push_back(mean(abs2[i]));
    out.mc_stderr.push_back(std::sqrt(sample_variance(abs2[i]) / reps));
  }
  return out;
}

void crit_second_moment_pair(StatsSink& sink, std::uint64_t seed, CriterionResult* c4,
                             CriterionResult* c5) {
  const auto t0 = clock_type::now();
  const std::vector<ModelSpec> specs = {{WeightModel::two_point(0.75), 2},
                                        lognormal_spec(0.3, 3)};
  constexpr int kDepth = 12;
  constexpr int kReps = 10000;
  double worst4 = 0.0, worst5 = 0.0;  // |mc-series| in stderr units
  double t4 = 0.0;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const auto& spec = specs[si];
    std::vector<std::uint64_t> s_list = {1, 3, 7, 16};
    const std::size_t plain_count = s_list.size();
    for (int n : {2, 4, 6}) s_list.push_back(pow_u64(static_cast<std::uint64_t>(spec.b), n));
    const MomentMc mc =
        mc_second_moments(spec, kDepth, kReps, s_list, seed ^ (0x4000 + si));
    const double m2 = moment(spec.weight, 2.0);
    for (std::size_t i = 0; i < s_list.size(); ++i) {
      const bool badic = i >= plain_count;
      const int n_exp = badic ? 2 * (static_cast<int>(i - plain_count) + 1) : 0;
      const double oracle =
          badic ? std::pow(m2 / spec.b, n_exp) * second_moment_series(spec, 1, kDepth - n_exp)
                : second_moment_series(spec, s_list[i], kDepth);
      const double sigmas = std::fabs(mc.mc_mean[i] - oracle) / std::max(mc.mc_stderr[i], 1e-300);
      (badic ? worst5 : worst4) = std::max(badic ? worst5 : worst4, sigmas);
      sink.add(badic ? 5 : 4,
               "b" + std::to_string(spec.b) + "_s" + std::to_string(s_list[i]) + "_sigmas", sigmas);
      sink.add(badic ? 5 : 4, "b" + std::to_string(spec.b) + "_s" + std::to_string(s_list[i]) + "_mc",
               mc.mc_mean[i]);
    }
    if (si == 0) t4 = seconds_since(t0);
  }
  const double total = seconds_since(t0);
  (void)t4;
  *c4 = {4, "exact second moment vs MC", worst4 <= 3.0,
         "max_sigmas=" + format_double(worst4), total, 120.0};
  c4->pass = c4->pass && total < 120.0;
  *c5 = {5, "b-adic scaling identity", worst5 <= 3.0, "max_sigmas=" + format_double(worst5),
         total, 120.0};
  c5->pass = c5->pass && total < 120.0;
}

// ---- criterion 6: conditional variance identity -----------------------------

CriterionResult crit_conditional_identity(StatsSink& sink, std::uint64_t seed) {
  const auto t0 = clock_type::now();
  const ModelSpec spec = lognormal_spec(0.3, 3);
  constexpr int kPrefix = 5, kDepth = 12, kReps = 5000;
  const double d_f = fourier_dimension(spec);
  const std::uint64_t s_freq = pow_u64(3, kPrefix);
  const FrequencyProbe probe(spec.b, kDepth);

  const CascadeField prefix = sample_field(spec, kPrefix, seed);
  const double msq = squared_mass(prefix);
  const double rho_trunc = second_moment_series(spec, 1, kDepth - kPrefix);
  const double bpow = std::pow(3.0, kPrefix * d_f);

  std::vector<double> vals(kReps), re(kReps), im(kReps);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < kReps; ++r) {
    const CascadeField field =
        sample_field(spec, kDepth, seed, nullptr, TailSalt{static_cast<std::uint64_t>(r) + 1, kPrefix});
    const std::complex<double> z = probe.eval(field, s_freq);
    vals[r] = bpow * std::norm(z);
    re[r] = z.real();
    im[r] = z.imag();
  }
  const double ratio = mean(vals) / (rho_trunc * msq);
  const double mre = mean(re), mim = mean(im);
  double cxy = 0, cxx = 0, cyy = 0;
  for (int r = 0; r < kReps; ++r) {
    cxy += (re[r] - mre) * (im[r] - mim);
    cxx += (re[r] - mre) * (re[r] - mre);
    cyy += (im[r] - mim) * (im[r] - mim);
  }
  const double corr = cxy / std::sqrt(cxx * cyy);
  sink.add(6, "conditional_ratio", ratio);
  sink.add(6, "re_im_corr", corr);
  CriterionResult r{6, "conditional variance identity",
                    std::fabs(ratio - 1.0) <= 0.05 && std::fabs(corr) < 0.05,
                    "ratio=" + format_double(ratio) + " corr=" + format_double(corr), 0, 180.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criteria 7 & 8: correlation and entropy dimension trends ---------------

void crit_dimension_trends(StatsSink& sink, std::uint64_t seed, CriterionResult* c7,
                           CriterionResult* c8) {
  const auto t0 = clock_type::now();
  const std::vector<ModelSpec> specs = {{WeightModel::two_point(0.75), 2},
                                        lognormal_spec(0.3, 2)};
  constexpr int kLo = 16, kHi = 20, kReps = 20;
  double worst7 = 0.0, worst8 = 0.0;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    const auto& spec = specs[si];
    const double logb = std::log(2.0);
    std::vector<std::vector<double>> log_sumsq(kHi - kLo + 1);
    std::vector<std::vector<double>> entropy(kHi - kLo + 1);
    for (int rep = 0; rep < kReps; ++rep) {
      const auto stats = sweep_level_products(spec, kHi, seed ^ (0x7000 + si * 1000 + rep), {},
                                              WeightTransform::Plain);
      for (int m = kLo; m <= kHi; ++m) {
        // masses at level m are b^-m times the products
        const double sum_sq = stats.sum_sq[m] * std::pow(2.0, -2.0 * m);
        const double total = stats.sum[m] * std::pow(2.0, -m);
        if (sum_sq > 0.0 && total > 0.0) {
          log_sumsq[m - kLo].push_back(std::log(sum_sq));
          const double sum_mlogm = std::pow(2.0, -m) * (stats.sum_plogp[m] - m * logb * stats.sum[m]);
          entropy[m - kLo].push_back(std::log(total) - sum_mlogm / total);
        }
      }
    }
    std::vector<double> xs, y7, y8;
    for (int m = kLo; m <= kHi; ++m) {
      xs.push_back(m * logb);
      y7.push_back(mean(log_sumsq[m - kLo]));
      y8.push_back(mean(entropy[m - kLo]));
    }
    const double d2_hat = -linear_fit(xs, y7).slope;
    const double dh_hat = linear_fit(xs, y8).slope;
    const double err7 = std::fabs(d2_hat - fourier_dimension(spec));
    const double err8 = std::fabs(dh_hat - hausdorff_dimension(spec));
    worst7 = std::max(worst7, err7);
    worst8 = std::max(worst8, err8);
    sink.add(7, "b2_spec" + std::to_string(si) + "_d2hat", d2_hat);
    sink.add(8, "b2_spec" + std::to_string(si) + "_dhhat", dh_hat);
  }
  const double total = seconds_since(t0);
  *c7 = {7, "correlation-dimension agreement", worst7 <= 0.05,
         "max_err=" + format_double(worst7), total, 300.0};
  c7->pass = c7->pass && total < 300.0;
  *c8 = {8, "entropy-dimension agreement", worst8 <= 0.05, "max_err=" + format_double(worst8),
         total, 120.0};
  c8->pass = c8->pass && total < 120.0;
}

// ---- criterion 9: deterministic H_V growth rate ------------------------------

CriterionResult crit_hv_growth(StatsSink& sink) {
  const auto t0 = clock_type::now();
  struct Triple {
    double alpha, q, p;
    int b;
  };
  const std::vector<Triple> triples = {{0.1, 4, 1.5, 2}, {0.2, 8, 1.2, 3}, {0.05, 16, 1.8, 2}};
  double worst = 0.0;
  for (const auto& t : triples) {
    const double target = t.p * (t.alpha + 1.0 / t.q);
    const FitResult fit = hv_growth(t.alpha, t.p, t.q, t.b, 12);
    worst = std::max(worst, std::fabs(fit.estimate - target));
    sink.add(9, "slope_a" + format_double(t.alpha) + "_q" + format_double(t.q), fit.estimate);
  }
  CriterionResult r{9, "H_V growth rate", worst <= 0.02, "max_err=" + format_double(worst), 0,
                    30.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  sink.add(9, "max_err", worst);
  return r;
}

// ---- criterion 10: norm-criterion arithmetic ---------------------------------

CriterionResult crit_norm_arithmetic(StatsSink& sink) {
  const auto t0 = clock_type::now();
  const std::vector<ModelSpec> specs = {lognormal_spec(0.2, 3), lognormal_spec(0.5, 3),
                                        lognormal_spec(0.8, 3), {WeightModel::two_point(0.6), 3}};
  int checked = 0, matched = 0;
  for (const auto& spec : specs) {
    const double logb = std::log(3.0);
    const double m2 = moment(spec.weight, 2.0);
    const SquaredRegime regime = classify_squared_regime(spec);
    for (double alpha : {0.05, 0.15, 0.25, 0.35, 0.45}) {
      for (double q : {4.0, 6.0, 10.0, 16.0}) {
        if (!(q > 1.0 / (1.0 - alpha))) continue;
        if (checked >= 50) break;
        ++checked;
        Verdict expected;
        if (regime == SquaredRegime::Super) {
          // independent route: analytic beta for the log-normal family
          const double beta = spec.weight.sigma / std::sqrt(2.0 * logb);
          const double psi_beta = (beta - 1.0) * (beta - 1.0) * logb;
          expected = (alpha + 1.0 / q <= psi_beta / logb) ? Verdict::Finite : Verdict::Diverging;
        } else {
          const double gap = std::log(m2) - (1.0 - 2.0 * alpha - 2.0 / q) * logb;
          expected = gap < 0.0 ? Verdict::Finite
                               : (gap == 0.0 && regime == SquaredRegime::Critical ? Verdict::Borderline
                                                                                  : Verdict::Diverging);
        }
        if (norm_criterion(spec, alpha, 1.5, q) == expected) ++matched;
      }
    }
  }
  sink.add(10, "checked", checked);
  sink.add(10, "matched", matched);
  CriterionResult r{10, "norm criterion arithmetic", checked >= 50 && matched == checked,
                    std::to_string(matched) + "/" + std::to_string(checked), 0, 1.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 11: super-critical stable tail --------------------------------

CriterionResult crit_super_tail(StatsSink& sink, std::uint64_t seed) {
  const auto t0 = clock_type::now();
  const ModelSpec spec = lognormal_spec(1.0, 2);  // sigma^2 = log b, beta = 1/sqrt(2)
  const FluctuationReport rep = fluctuation_suite(spec, 10, 14, 20000, seed ^ 0x1100);
  const double target = std::sqrt(2.0);
  const double got = rep.tail_index.value_or(0.0);
  sink.add(11, "tail_index", got);
  CriterionResult r{11, "super-critical tail index", std::fabs(got - target) <= 0.25,
                    "tail_index=" + format_double(got) + " target=" + format_double(target), 0,
                    600.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 12: partition-function small moments ---------------------------

CriterionResult crit_partition_small_moments(StatsSink& sink, std::uint64_t seed) {
  const auto t0 = clock_type::now();
  const ModelSpec spec = lognormal_spec(1.0, 2);
  const auto tr = biggins_kyprianou(spec);
  constexpr double kGamma = 1.5, kR = 0.4;
  constexpr int kDepth = 12, kReps = 20000;
  const double gammas[] = {kGamma};
  std::vector<std::vector<double>> zr(kDepth + 1, std::vector<double>(kReps));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < kReps; ++r) {
    const auto walk = sweep_level_walk(spec, kDepth, seed ^ (0x1200 + r), {}, *tr, gammas);
    for (int n = 0; n <= kDepth; ++n) zr[n][r] = std::pow(walk.partition[0][n], kR);
  }
  std::vector<double> xs, ys;
  for (int n = 4; n <= kDepth; ++n) {
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(mean(zr[n])));
  }
  const double slope = linear_fit(xs, ys).slope;
  const double target = -1.5 * kR * kGamma;
  sink.add(12, "slope", slope);
  CriterionResult r{12, "partition-function small moments", std::fabs(slope - target) <= 0.35,
                    "slope=" + format_double(slope) + " target=" + format_double(target), 0, 300.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 13: q=2 moment scaling via the series oracle -------------------

CriterionResult crit_series_slope(StatsSink& sink) {
  const auto t0 = clock_type::now();
  double worst = 0.0;
  {
    const ModelSpec spec{WeightModel::two_point(0.75), 2};
    const std::vector<std::uint64_t> ks = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
    const FitResult fit = moment_scaling(spec, 2.0, ks, 0, 0, 0);
    const double target = -(1.0 - std::log(moment(spec.weight, 2.0)) / std::log(2.0));
    worst = std::max(worst, std::fabs(fit.estimate - target));
    sink.add(13, "b2_slope", fit.estimate);
  }
  {
    const ModelSpec spec = lognormal_spec(0.3, 3);
    const std::vector<std::uint64_t> ks = {27, 81, 243, 729, 2187};
    const FitResult fit = moment_scaling(spec, 2.0, ks, 0, 0, 0);
    const double target = -(1.0 - std::log(moment(spec.weight, 2.0)) / std::log(3.0));
    worst = std::max(worst, std::fabs(fit.estimate - target));
    sink.add(13, "b3_slope", fit.estimate);
  }
  CriterionResult r{13, "q=2 moment-scaling slope (series)", worst <= 0.05,
                    "max_err=" + format_double(worst), 0, 10.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

// ---- criterion 14: Frostman growth proxy --------------------------------------

CriterionResult crit_frostman_proxy(StatsSink& sink, std::uint64_t seed) {
  const auto t0 = clock_type::now();
  const ModelSpec spec = lognormal_spec(0.3, 2);
  const double gamma = 0.8 * fourier_dimension(spec) / 2.0;
  constexpr int kReps = 100;
  std::vector<int> ok(kReps, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < kReps; ++r) {
    const std::uint64_t s = seed ^ (0x1400 + r);
    const CascadeField deep = sample_field(spec, 16, s);
    const CascadeField shallow = sample_field(spec, 10, s);  // same realization, coarser
    const double ratio = frostman_stat(deep, gamma) / frostman_stat(shallow, gamma);
    ok[r] = ratio < 2.0 ? 1 : 0;
  }
  int good = 0;
  for (int r = 0; r < kReps; ++r) good += ok[r];
  sink.add(14, "bounded_fraction", good / static_cast<double>(kReps));
  CriterionResult r{14, "Frostman growth proxy", good >= 95,
                    std::to_string(good) + "/100 ratios below 2", 0, 180.0};
  r.seconds = seconds_since(t0);
  r.pass = r.pass && r.seconds < r.budget_seconds;
  return r;
}

void write_rows(const std::filesystem::path& path, const std::string& header,
                const std::vector<std::string>& rows) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  os << header << '\n';
  for (const auto& row : rows) os << row << '\n';
}

}  // namespace

std::map<std::string, std::string> run_stats_pipeline(std::uint64_t seed,
                                                      const std::filesystem::path& out_dir,
                                                      std::vector<CriterionResult>* results) {
  StatsSink sink;
  std::vector<std::string> sweep_rows;
  std::vector<CriterionResult> res;

  res.push_back(crit_lognormal_closed_form(sink, sweep_rows));
  res.push_back(crit_salem(sink));
  res.push_back(crit_bk_transform(sink));
  CriterionResult c4, c5;
  crit_second_moment_pair(sink, seed, &c4, &c5);
  res.push_back(c4);
  res.push_back(c5);
  res.push_back(crit_conditional_identity(sink, seed ^ 0x600));
  CriterionResult c7, c8;
  crit_dimension_trends(sink, seed, &c7, &c8);
  res.push_back(c7);
  res.push_back(c8);
  res.push_back(crit_hv_growth(sink));
  res.push_back(crit_norm_arithmetic(sink));
  res.push_back(crit_super_tail(sink, seed));
  res.push_back(crit_partition_small_moments(sink, seed));
  res.push_back(crit_series_slope(sink));
  res.push_back(crit_frostman_proxy(sink, seed));

  std::map<std::string, std::string> digests;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_rows(out_dir / "stats.csv", "criterion,stat,value", sink.rows);
    write_rows(out_dir / "sweep.csv", "b,sigma,d_h,d_f", sweep_rows);
    // sample dumps exercise the binary and csv formats inside the digest set
    const CascadeField field = sample_field(lognormal_spec(0.3, 3), 6, seed ^ 0xD1);
    write_field_bin(field, out_dir / "sample_field.bin");
    const Spectrum sp = fourier_all(field);
    write_spectrum_bin(sp, out_dir / "sample_spectrum.bin");
    write_spectrum_csv(sp, out_dir / "sample_spectrum.csv");
    for (const char* f :
         {"stats.csv", "sweep.csv", "sample_field.bin", "sample_spectrum.bin", "sample_spectrum.csv"})
      digests[f] = fnv1a_digest_file(out_dir / f);
  }
  if (results) *results = std::move(res);
  return digests;
}

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt) {
#ifdef _OPENMP
  omp_set_num_threads(opt.threads);
#endif
  std::vector<CriterionResult> results;
  const std::filesystem::path main_dir = opt.out_dir.empty() ? "" : opt.out_dir;
  const auto main_digests = run_stats_pipeline(opt.seed, main_dir, &results);

  if (opt.with_reproducibility) {
    const auto t0 = clock_type::now();
    bool identical = true;
    std::string detail;
    const std::filesystem::path tmp_root =
        (opt.out_dir.empty() ? std::filesystem::temp_directory_path() : opt.out_dir) /
        "repro_runs";
    for (int threads : {1, 4, 8}) {
#ifdef _OPENMP
      omp_set_num_threads(threads);
#endif
      const auto dir = tmp_root / ("t" + std::to_string(threads));
      const auto digests = run_stats_pipeline(opt.seed, dir, nullptr);
      if (digests != main_digests) {
        identical = false;
        detail += " mismatch@t" + std::to_string(threads);
      }
    }
#ifdef _OPENMP
    omp_set_num_threads(opt.threads);
#endif
    CriterionResult r{15, "reproducibility across thread counts", identical,
                      identical ? "digests identical at 1/4/8 threads vs main run"
                                : ("digest" + detail),
                      0, 0.0};
    r.seconds = seconds_since(t0);
    results.push_back(r);
  }

  if (!opt.out_dir.empty()) {
    std::vector<std::string> rows;
    for (const auto& r : results) {
      std::ostringstream os;
      os << r.id << ',' << (r.pass ? "pass" : "FAIL") << ',' << format_double(r.seconds) << ",\""
         << r.name << "\",\"" << r.detail << '"';
      rows.push_back(os.str());
    }
    write_rows(opt.out_dir / "report.csv", "criterion,status,seconds,name,detail", rows);
  }
  return results;
}

}  // namespace mccm
