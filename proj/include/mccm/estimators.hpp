#ifndef MCCM_ESTIMATORS_HPP
#define MCCM_ESTIMATORS_HPP

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mccm/cascade.hpp"
#include "mccm/spectrum.hpp"

namespace mccm {

struct FitResult {
  double estimate = 0;
  double std_err = 0;
  int n_points = 0;
  std::string method;
};

// Decay exponent D with |mu_hat(k)|^2 = O(k^-D): regression of the log of
// per-block maxima (blocks base^{l-1} <= k < base^l, maxima averaged in log
// across realizations) against -l log(base).
FitResult decay_fit(const std::vector<Spectrum>& spectra, int block_base);

// Plug-in L^p dimension -log(sum masses^p) / (n (p-1) log b) at the field's depth.
double lp_dimension(const CascadeField& field, double p);

// Normalized entropy sum -(m/M) log_b(m/M) / n.
double entropy_dimension(const CascadeField& field);

// sup over b-adic intervals at all levels <= depth of mu(I)/|I|^gamma.
double frostman_stat(const CascadeField& field, double gamma);

enum class Verdict { Finite, Diverging, Borderline };
const char* verdict_name(Verdict v);

// Analytic finiteness criterion for the (alpha,p,q)-norm, by regime:
// sub-critical   E[W^2] < b^{1-2a-2/q}  (iff),
// critical       same inequality, equality reported Borderline,
// super-critical alpha + 1/q <= psi(beta)/log b  (iff).
Verdict norm_criterion(const ModelSpec& spec, double alpha, double p, double q);

struct ChiNormResult {
  double chi_hat = 0;     // MC estimate of the depth-N partial characteristic quantity
  double norm_hat = 0;    // MC estimate of the depth-N partial (alpha,p,q)-norm
  std::vector<double> r_seq;
  Verdict verdict = Verdict::Diverging;
};
ChiNormResult chi_and_norm(const ModelSpec& spec, double alpha, double p, double q, int depth,
                           int reps, std::uint64_t seed);

struct FluctuationReport {
  SquaredRegime regime = SquaredRegime::Sub;
  int n = 0;
  int depth = 0;
  int reps = 0;
  std::complex<double> mean;            // of the rescaled coefficient, all replicates
  double second_moment = 0;             // of b^{nD_F/2} mu_hat(b^n), all replicates
  double second_moment_stderr = 0;
  double oracle_second_moment = 0;      // truncated-series value (NaN when E[W^2] >= b)
  double re_im_corr = 0;                // over surviving replicates
  std::pair<double, double> conditional_ratio_stats{0, 0};  // (ratio, std err)
  std::optional<double> tail_index;     // super-critical only
  std::optional<double> re_im_var_ratio;  // b = 2 diagnostic: Var(Re)/Var(Im)
  int survivors = 0;
};

// Rescaled-coefficient fluctuation checks at frequency b^n on depth-N fields:
// mean, second moment vs the truncated-series oracle, Re/Im correlation, the
// conditional variance ratio against rho_trunc M_n(W2) under a fixed level-n
// prefix, and (super-critical) a rank-based tail index targeting 1/beta.
// replicate_stream, when set, receives raw per-replicate rows "rep,stat,value".
FluctuationReport fluctuation_suite(const ModelSpec& spec, int n, int N, int reps,
                                    std::uint64_t seed,
                                    std::optional<SquaredRegime> expect = std::nullopt,
                                    std::ostream* replicate_stream = nullptr);

nlohmann::json fluctuation_report_to_json(const FluctuationReport& r);

// Regression of log E[|mu_hat(k)|^q] on log k. With q = 2 and reps = 0 the
// expectation is the exact series, no sampling.
FitResult moment_scaling(const ModelSpec& spec, double q, std::span<const std::uint64_t> k_list,
                         int depth, int reps, std::uint64_t seed);

// Deterministic growth rate of ||T_n||^p_{L^p(l^q)} for the Lebesgue l^q
// vector measure; the fitted slope approaches p(alpha + 1/q).
FitResult hv_growth(double alpha, double p, double q, int b, int n_max);

// Whether b^{n(D_F+eps)} |mu_hat(b^n)|^2 shows the divergent envelope along
// b-adic frequencies. N < 6 is inconclusive and reported false.
bool divergence_probe(const ModelSpec& spec, double eps, int N, int reps, std::uint64_t seed);

}  // namespace mccm

#endif
