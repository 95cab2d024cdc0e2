#include "mccm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mccm/errors.hpp"
#include "mccm/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccm {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSurvivalFloor = 1e-12;

double log_b(const ModelSpec& spec) { return std::log(static_cast<double>(spec.b)); }
}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Finite: return "Finite";
    case Verdict::Diverging: return "Diverging";
    case Verdict::Borderline: return "Borderline";
  }
  return "?";
}

FitResult decay_fit(const std::vector<Spectrum>& spectra, int block_base) {
  if (spectra.size() < 2) throw Error(ErrorCode::TooFewBlocks, "need at least 2 spectra");
  if (block_base < 2) throw Error(ErrorCode::BadConfig, "block_base must be >= 2");
  const std::uint64_t kmax = spectra.front().kmax;
  for (const auto& sp : spectra)
    if (sp.kmax != kmax) throw Error(ErrorCode::BadConfig, "mixed kmax across spectra");

  // survival conditioning: realizations with no mass carry no spectrum
  std::vector<const Spectrum*> alive;
  for (const auto& sp : spectra)
    if (std::abs(sp.coeffs[0]) > kSurvivalFloor) alive.push_back(&sp);
  if (alive.size() < 2) throw Error(ErrorCode::TooFewBlocks, "fewer than 2 surviving spectra");

  std::vector<double> x, y;
  std::uint64_t lo = 1;
  for (int l = 1;; ++l) {
    const std::uint64_t hi = lo * static_cast<std::uint64_t>(block_base);
    if (hi - 1 > kmax) break;
    std::vector<double> logs;
    for (const Spectrum* sp : alive) {
      double blockmax = 0.0;
      for (std::uint64_t k = lo; k < hi; ++k) blockmax = std::max(blockmax, std::norm(sp->coeffs[k]));
      // blocks at rounding-noise level (the flat fixture) are unusable
      const double floor2 = std::norm(sp->coeffs[0]) * 1e-28;
      if (blockmax > floor2) logs.push_back(std::log(blockmax));
    }
    if (logs.size() == alive.size()) {
      x.push_back(-static_cast<double>(l) * std::log(static_cast<double>(block_base)));
      y.push_back(mean(logs));
    }
    lo = hi;
  }
  if (x.size() < 3) throw Error(ErrorCode::TooFewBlocks, "fewer than 3 usable blocks");
  // the block maximum inflates by roughly log(block size) at small l; fit the
  // trailing half of the blocks where that envelope term has flattened
  const std::size_t start = std::min(x.size() / 2, x.size() - 3);
  const LinearFit fit =
      linear_fit(std::span(x).subspan(start), std::span(y).subspan(start));
  return {fit.slope, fit.slope_stderr, fit.n, "decay-blockmax"};
}

double lp_dimension(const CascadeField& field, double p) {
  if (!(p > 1.0)) throw Error(ErrorCode::BadConfig, "need p > 1");
  if (field.depth < 1) throw Error(ErrorCode::BadConfig, "need depth >= 1");
  const double total = total_mass(field);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroField, "field has no mass");
  const double sum_p = blocked_sum(field.masses.size(), [&](std::size_t k) {
    const double m = field.masses[k];
    return m > 0.0 ? std::pow(m, p) : 0.0;
  });
  return -std::log(sum_p) / (field.depth * (p - 1.0) * log_b(field.spec));
}

double entropy_dimension(const CascadeField& field) {
  if (field.depth < 1) throw Error(ErrorCode::BadConfig, "need depth >= 1");
  const double total = total_mass(field);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroField, "field has no mass");
  const double sum_plogp = blocked_sum(field.masses.size(), [&](std::size_t k) {
    const double q = field.masses[k] / total;
    return q > 0.0 ? q * std::log(q) : 0.0;
  });
  return -sum_plogp / (field.depth * log_b(field.spec));
}

double frostman_stat(const CascadeField& field, double gamma) {
  if (gamma < 0.0) throw Error(ErrorCode::BadConfig, "need gamma >= 0");
  const int b = field.spec.b;
  std::vector<double> cur = field.masses;
  double stat = 0.0;
  for (int m = field.depth;; --m) {
    const double scale = std::pow(static_cast<double>(b), m * gamma);
    double level_max = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : level_max)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(cur.size()); ++k)
      level_max = std::max(level_max, cur[static_cast<std::size_t>(k)]);
    stat = std::max(stat, level_max * scale);
    if (m == 0) break;
    std::vector<double> next(cur.size() / b);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(next.size()); ++k) {
      double s = 0.0;
      for (int c = 0; c < b; ++c) s += cur[static_cast<std::size_t>(k) * b + c];
      next[static_cast<std::size_t>(k)] = s;
    }
    cur = std::move(next);
  }
  return stat;
}

Verdict norm_criterion(const ModelSpec& spec, double alpha, double p, double q) {
  if (!(alpha >= 0.0 && alpha < 1.0 && p > 1.0 && p <= 2.0 && q >= 2.0 &&
        q > 1.0 / (1.0 - alpha)))
    throw Error(ErrorCode::BadExponents, "need 1<p<=2<=q, 0<=alpha<1, q>1/(1-alpha)");
  const SquaredRegime regime = classify_squared_regime(spec);
  if (regime == SquaredRegime::Super) {
    const auto tr = biggins_kyprianou(spec);
    if (!tr) throw Error(ErrorCode::NotBoundary, "super-critical weight must be boundary case");
    const double lhs = alpha + 1.0 / q;
    const double rhs = psi(*tr, tr->beta) / log_b(spec);
    return lhs <= rhs ? Verdict::Finite : Verdict::Diverging;
  }
  const double gap = std::log(moment(spec.weight, 2.0)) - (1.0 - 2.0 * alpha - 2.0 / q) * log_b(spec);
  if (gap < 0.0) return Verdict::Finite;
  if (gap == 0.0 && regime == SquaredRegime::Critical) return Verdict::Borderline;
  return Verdict::Diverging;
}

ChiNormResult chi_and_norm(const ModelSpec& spec, double alpha, double p, double q, int depth,
                           int reps, std::uint64_t seed) {
  if (reps < 1) throw Error(ErrorCode::BadConfig, "need reps >= 1");
  ChiNormResult out;
  out.verdict = norm_criterion(spec, alpha, p, q);  // also validates exponents

  const SquaredRegime regime = classify_squared_regime(spec);
  const double m2 = moment(spec.weight, 2.0);
  const std::uint64_t smax = pow_u64(static_cast<std::uint64_t>(spec.b), depth);

  // Theta_alpha(m, s) = s^{-2(1-alpha)} |e^{i 2 pi s b^-m} - 1|^2 / (4 pi^2)
  std::vector<double> theta(static_cast<std::size_t>(depth) * smax);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t s = 1; s <= static_cast<std::int64_t>(smax); ++s) {
    for (int m = 1; m <= depth; ++m) {
      const double frac = static_cast<double>(s % static_cast<std::int64_t>(pow_u64(spec.b, m))) /
                          static_cast<double>(pow_u64(spec.b, m));
      const double osc = 2.0 * std::sin(kPi * frac);
      theta[static_cast<std::size_t>(m - 1) * smax + static_cast<std::size_t>(s - 1)] =
          std::pow(static_cast<double>(s), -2.0 * (1.0 - alpha)) * osc * osc / (4.0 * kPi * kPi);
    }
  }

  std::vector<double> chi_samples(reps), norm_samples(reps);
  std::vector<double> msq_mean(depth, 0.0);  // E[M_m(W2)^{p/2}], m = 0..depth-1
  std::vector<std::vector<double>> msq_samples(depth, std::vector<double>(reps));

  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t rep_seed = seed ^ static_cast<std::uint64_t>(rep);
    const auto stats = sweep_level_products(spec, depth, rep_seed, {}, WeightTransform::SquaredNormalized);
    // chi sample: sum_s ( sum_m b P_m Theta(m,s) )^{q/2} with
    // P_m = sum over level m-1 of squared products = stats.sum[m-1] m2^{m-1}
    std::vector<double> inner(smax);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t s = 1; s <= static_cast<std::int64_t>(smax); ++s) {
      double acc = 0.0;
      double m2pow = 1.0;
      for (int m = 1; m <= depth; ++m) {
        acc += spec.b * stats.sum[m - 1] * m2pow *
               theta[static_cast<std::size_t>(m - 1) * smax + static_cast<std::size_t>(s - 1)];
        m2pow *= m2;
      }
      inner[static_cast<std::size_t>(s - 1)] = std::pow(acc, q / 2.0);
    }
    chi_samples[rep] = std::pow(tree_sum(inner), p / q);
    for (int m = 0; m < depth; ++m) {
      const double msq = stats.sum[m] * std::pow(static_cast<double>(spec.b), -m);
      msq_samples[m][rep] = std::pow(msq, p / 2.0);
    }
    // partial norm sample from the exact spectrum of the same realization
    const CascadeField field = sample_field(spec, depth, rep_seed);
    const Spectrum sp = fourier_all(field);
    std::vector<double> terms(smax);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t s = 1; s <= static_cast<std::int64_t>(smax); ++s)
      terms[static_cast<std::size_t>(s - 1)] =
          std::pow(std::pow(static_cast<double>(s), alpha) * std::abs(sp.coeffs[static_cast<std::size_t>(s)]), q);
    norm_samples[rep] = std::pow(tree_sum(terms), p / q);
  }
  out.chi_hat = mean(chi_samples);
  out.norm_hat = std::pow(mean(norm_samples), 1.0 / p);
  for (int m = 0; m < depth; ++m) msq_mean[m] = mean(msq_samples[m]);

  // R_n = E[M_{n-1}(W2)^{p/2}] (E[W^2]/b^{1-2a-2/q})^{np/2}; in the squared
  // super-critical regime the small-moment proxy n^{-3pb/2} e^{-np psi(2b)/2}
  // replaces the MC factor (shape only, constants unknown).
  const double ratio = m2 / std::pow(static_cast<double>(spec.b), 1.0 - 2.0 * alpha - 2.0 / q);
  out.r_seq.resize(depth);
  if (regime == SquaredRegime::Super) {
    const auto tr = biggins_kyprianou(spec);
    const double psi2b = psi(*tr, 2.0 * tr->beta);
    for (int n = 1; n <= depth; ++n) {
      const int m = n - 1;
      const double small_moment =
          m == 0 ? 1.0 : std::pow(static_cast<double>(m), -1.5 * p * tr->beta) * std::exp(-m * p * psi2b / 2.0);
      out.r_seq[n - 1] = small_moment * std::pow(ratio, n * p / 2.0);
    }
  } else {
    for (int n = 1; n <= depth; ++n)
      out.r_seq[n - 1] = msq_mean[n - 1] * std::pow(ratio, n * p / 2.0);
  }
  return out;
}

FluctuationReport fluctuation_suite(const ModelSpec& spec, int n, int N, int reps,
                                    std::uint64_t seed, std::optional<SquaredRegime> expect,
                                    std::ostream* replicate_stream) {
  if (reps < 100) throw Error(ErrorCode::BadConfig, "need reps >= 100");
  if (!(N > n && n >= 1)) throw Error(ErrorCode::BadConfig, "need depth N > n >= 1");
  FluctuationReport rep_out;
  rep_out.regime = classify_squared_regime(spec);
  if (expect && *expect != rep_out.regime)
    throw Error(ErrorCode::RegimeMismatch, "model is in a different squared regime");
  rep_out.n = n;
  rep_out.depth = N;
  rep_out.reps = reps;

  const double d_f = fourier_dimension(spec);
  const double m2 = moment(spec.weight, 2.0);
  double scale = std::pow(static_cast<double>(spec.b), n * d_f / 2.0);
  std::optional<BoundaryTransform> tr;
  if (rep_out.regime == SquaredRegime::Critical) {
    scale *= std::pow(static_cast<double>(n), 0.25);
  } else if (rep_out.regime == SquaredRegime::Super) {
    tr = biggins_kyprianou(spec);
    if (!tr) throw Error(ErrorCode::NotBoundary, "super-critical weight must be boundary case");
    scale *= std::pow(static_cast<double>(n), 1.5 * tr->beta);
  }

  const std::uint64_t s_freq = pow_u64(static_cast<std::uint64_t>(spec.b), n);
  const FrequencyProbe probe(spec.b, N);

  std::vector<double> w_re(reps), w_im(reps), w_abs2(reps);
  std::vector<int> alive(reps, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < reps; ++r) {
    const CascadeField field = sample_field(spec, N, seed ^ static_cast<std::uint64_t>(r));
    const std::complex<double> z = probe.eval(field, s_freq) * scale;
    w_re[r] = z.real();
    w_im[r] = z.imag();
    w_abs2[r] = std::norm(z);
    alive[r] = total_mass(field) >= kSurvivalFloor ? 1 : 0;
  }
  int survivors = 0;
  for (int r = 0; r < reps; ++r) survivors += alive[r];
  rep_out.survivors = survivors;
  if (replicate_stream) {
    *replicate_stream << "rep,stat,value\n";
    for (int r = 0; r < reps; ++r)
      *replicate_stream << r << ",re," << w_re[r] << '\n'
                        << r << ",im," << w_im[r] << '\n'
                        << r << ",abs2," << w_abs2[r] << '\n'
                        << r << ",alive," << alive[r] << '\n';
  }

  rep_out.mean = {mean(w_re), mean(w_im)};
  // second moment of the b^{nD_F/2}-rescaled coefficient (regime-extra
  // scalings removed so the truncated-series oracle applies directly)
  const double extra = scale / std::pow(static_cast<double>(spec.b), n * d_f / 2.0);
  std::vector<double> base2(reps);
  for (int r = 0; r < reps; ++r) base2[r] = w_abs2[r] / (extra * extra);
  rep_out.second_moment = mean(base2);
  rep_out.second_moment_stderr = std::sqrt(sample_variance(base2) / reps);
  rep_out.oracle_second_moment =
      m2 < spec.b ? std::pow(static_cast<double>(spec.b), n * d_f) * second_moment_series(spec, s_freq, N)
                  : std::numeric_limits<double>::quiet_NaN();

  {  // correlation over survivors
    std::vector<double> re_s, im_s;
    re_s.reserve(survivors);
    im_s.reserve(survivors);
    for (int r = 0; r < reps; ++r)
      if (alive[r]) {
        re_s.push_back(w_re[r]);
        im_s.push_back(w_im[r]);
      }
    const double mre = mean(re_s), mim = mean(im_s);
    double cxy = 0, cxx = 0, cyy = 0;
    for (std::size_t i = 0; i < re_s.size(); ++i) {
      cxy += (re_s[i] - mre) * (im_s[i] - mim);
      cxx += (re_s[i] - mre) * (re_s[i] - mre);
      cyy += (im_s[i] - mim) * (im_s[i] - mim);
    }
    rep_out.re_im_corr = (cxx > 0 && cyy > 0) ? cxy / std::sqrt(cxx * cyy) : 0.0;
    if (spec.b == 2 && cyy > 0) rep_out.re_im_var_ratio = cxx / cyy;
  }

  if (rep_out.regime == SquaredRegime::Super) {
    std::vector<double> mag;
    mag.reserve(survivors);
    for (int r = 0; r < reps; ++r)
      if (alive[r]) mag.push_back(std::sqrt(w_abs2[r]));
    std::sort(mag.begin(), mag.end(), std::greater<>());
    const std::size_t k = std::max<std::size_t>(10, mag.size() / 20);  // top 5%
    if (mag.size() > k && mag[k - 1] > 0) {
      std::vector<double> lx(k), ly(k);
      for (std::size_t i = 0; i < k; ++i) {
        lx[i] = std::log(mag[i]);
        ly[i] = std::log(static_cast<double>(i + 1));
      }
      rep_out.tail_index = -linear_fit(lx, ly).slope;
    }
  }

  if (m2 < spec.b) {  // conditional phase needs the truncated-series oracle
    const CascadeField prefix = sample_field(spec, n, seed);
    const double msq_prefix = squared_mass(prefix);
    if (msq_prefix < kSurvivalFloor)
      throw Error(ErrorCode::ZeroField, "level-n prefix died; choose another seed");
    const double rho_trunc = second_moment_series(spec, 1, N - n);
    const double denom = rho_trunc * msq_prefix;
    const double bpow = std::pow(static_cast<double>(spec.b), n * d_f);
    std::vector<double> vals(reps);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r < reps; ++r) {
      const CascadeField field =
          sample_field(spec, N, seed, nullptr, TailSalt{static_cast<std::uint64_t>(r) + 1, n});
      vals[r] = bpow * std::norm(probe.eval(field, s_freq));
    }
    const double vm = mean(vals);
    const double vsd = std::sqrt(sample_variance(vals) / reps);
    rep_out.conditional_ratio_stats = {vm / denom, vsd / denom};
  }
  return rep_out;
}

FitResult moment_scaling(const ModelSpec& spec, double q, std::span<const std::uint64_t> k_list,
                         int depth, int reps, std::uint64_t seed) {
  if (k_list.size() < 3) throw Error(ErrorCode::TooFewBlocks, "need at least 3 frequencies");
  if (q == 2.0 && !(moment(spec.weight, 2.0) < spec.b))
    throw Error(ErrorCode::SeriesDiverges, "E[W^2] >= b");
  std::vector<double> x(k_list.size()), y(k_list.size());
  for (std::size_t i = 0; i < k_list.size(); ++i) x[i] = std::log(static_cast<double>(k_list[i]));

  if (q == 2.0 && reps == 0) {
    for (std::size_t i = 0; i < k_list.size(); ++i)
      y[i] = std::log(second_moment_series(spec, k_list[i], -1));
    const LinearFit fit = linear_fit(x, y);
    return {fit.slope, fit.slope_stderr, fit.n, "series-q2"};
  }

  if (reps < 2) throw Error(ErrorCode::BadConfig, "need reps >= 2 for the MC path");
  const FrequencyProbe probe(spec.b, depth);
  std::vector<std::vector<double>> samples(k_list.size(), std::vector<double>(reps));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < reps; ++r) {
    const CascadeField field = sample_field(spec, depth, seed ^ static_cast<std::uint64_t>(r));
    for (std::size_t i = 0; i < k_list.size(); ++i)
      samples[i][r] = std::pow(std::abs(probe.eval(field, k_list[i])), q);
  }
  for (std::size_t i = 0; i < k_list.size(); ++i) y[i] = std::log(mean(samples[i]));
  const LinearFit fit = linear_fit(x, y);
  return {fit.slope, fit.slope_stderr, fit.n, "mc-moment"};
}

FitResult hv_growth(double alpha, double p, double q, int b, int n_max) {
  if (!(alpha >= 0.0 && alpha < 1.0 && q > 1.0 / (1.0 - alpha)))
    throw Error(ErrorCode::SeriesDiverges, "need 0 <= alpha < 1 and q(1-alpha) > 1");
  if (n_max < 4) throw Error(ErrorCode::BadConfig, "need n_max >= 4");
  const double g = (1.0 - alpha) * q;
  std::vector<double> x(n_max), y(n_max);
  for (int n = 1; n <= n_max; ++n) {
    const std::uint64_t P = pow_u64(static_cast<std::uint64_t>(b), n);
    // log Sigma_n with Sigma_n = sum_{s>=1} s^{-(1-a)q} |e^{i 2 pi s/P} - 1|^q,
    // regrouped by residue class k and evaluated by log-sum-exp: the terms
    // underflow badly for large q.
    std::vector<double> lt(P - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t j = 0; j < static_cast<std::int64_t>(P - 1); ++j) {
      const double k = static_cast<double>(j + 1);
      const double frac = k / static_cast<double>(P);
      const double osc = 2.0 * std::fabs(std::sin(kPi * frac));
      // sum_l (k+Pl)^{-g} = k^{-g} sum_l (1 + (P/k) l)^{-g}
      lt[static_cast<std::size_t>(j)] =
          q * std::log(osc) - g * std::log(k) +
          std::log(inverse_power_sum(g, 1.0, static_cast<double>(P) / k));
    }
    double peak = lt[0];
    for (double t : lt) peak = std::max(peak, t);
    const double rest = blocked_sum(lt.size(), [&](std::size_t j) {
      return std::exp(lt[j] - peak);
    });
    const double log_sigma = peak + std::log(rest);
    x[n - 1] = n * std::log(static_cast<double>(b));
    y[n - 1] = p * (n * std::log(static_cast<double>(b)) - std::log(2.0 * kPi)) +
               (p / q) * log_sigma;
  }
  // trailing half; early levels carry the Riemann-sum transient
  const int lo = std::min(n_max / 2, n_max - 3);
  const LinearFit fit = linear_fit(std::span(x).subspan(lo), std::span(y).subspan(lo));
  return {fit.slope, fit.slope_stderr, fit.n, "hv-growth"};
}

nlohmann::json fluctuation_report_to_json(const FluctuationReport& r) {
  nlohmann::json j;
  j["regime"] = regime_name(r.regime);
  j["n"] = r.n;
  j["depth"] = r.depth;
  j["reps"] = r.reps;
  j["mean_re"] = r.mean.real();
  j["mean_im"] = r.mean.imag();
  j["second_moment"] = r.second_moment;
  j["second_moment_stderr"] = r.second_moment_stderr;
  j["oracle_second_moment"] = std::isnan(r.oracle_second_moment)
                                  ? nlohmann::json()
                                  : nlohmann::json(r.oracle_second_moment);
  j["re_im_corr"] = r.re_im_corr;
  j["conditional_ratio"] = r.conditional_ratio_stats.first;
  j["conditional_ratio_stderr"] = r.conditional_ratio_stats.second;
  j["tail_index"] = r.tail_index ? nlohmann::json(*r.tail_index) : nlohmann::json();
  j["re_im_var_ratio"] = r.re_im_var_ratio ? nlohmann::json(*r.re_im_var_ratio) : nlohmann::json();
  j["survivors"] = r.survivors;
  return j;
}

bool divergence_probe(const ModelSpec& spec, double eps, int N, int reps, std::uint64_t seed) {
  if (!(eps != 0.0)) throw Error(ErrorCode::BadConfig, "eps must be nonzero");
  if (reps < 10) throw Error(ErrorCode::BadConfig, "need reps >= 10");
  if (N < 6) return false;  // inconclusive by contract
  const double d_f = fourier_dimension(spec);
  const int n_count = N - 2;
  const FrequencyProbe probe(spec.b, N);
  std::vector<std::vector<double>> abs2(n_count, std::vector<double>(reps));
  std::vector<int> alive(reps, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int r = 0; r < reps; ++r) {
    const CascadeField field = sample_field(spec, N, seed ^ static_cast<std::uint64_t>(r));
    alive[r] = total_mass(field) >= kSurvivalFloor ? 1 : 0;
    for (int n = 1; n <= n_count; ++n)
      abs2[n - 1][r] = std::norm(probe.eval(field, pow_u64(spec.b, n)));
  }
  std::vector<double> running(n_count);
  double run_max = 0.0;
  for (int n = 1; n <= n_count; ++n) {
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r)
      if (alive[r]) vals.push_back(abs2[n - 1][r]);
    if (vals.empty()) return false;
    std::sort(vals.begin(), vals.end());
    const double med = vals[vals.size() / 2];
    run_max = std::max(run_max, med * std::pow(static_cast<double>(spec.b), n * (d_f + eps)));
    running[n - 1] = run_max;
  }
  const int third = std::max(1, n_count / 3);
  const double first = mean(std::span(running).first(third));
  const double last = mean(std::span(running).last(third));
  return last > first;
}

}  // namespace mccm
