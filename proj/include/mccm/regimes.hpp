#ifndef MCCM_REGIMES_HPP
#define MCCM_REGIMES_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "mccm/weights.hpp"

namespace mccm {

enum class SquaredRegime { Sub, Critical, Super };

const char* regime_name(SquaredRegime r);

// Representation W = exp(-beta xi)/E[exp(-beta xi)] with E[xi e^-xi] = 0 and
// E[e^-xi] = 1/b; beta = 1/t_star where t_star solves t phi'(t) = phi(t).
struct BoundaryTransform {
  double beta;
  double t_star;
  double log_norm;  // log E[b W^t_star]
  ModelSpec spec;
};

// Sign of E[W2 log W2] - log b for W2 = W^2/E[W^2]; ties within 1e-9 of zero
// classify as Critical.
SquaredRegime classify_squared_regime(const ModelSpec& spec);

double hausdorff_dimension(const ModelSpec& spec);

// Sub/critical: 1 - log_b E[W^2].
// Super: 1 - inf_{t in [1/2,1]} log E[b^{1-t} W^{2t}] / (t log b), located by a
// 64-point grid bracket plus golden-section refinement.
double fourier_dimension(const ModelSpec& spec);

// nullopt means the weight is bounded with b P(W = max) >= 1, which is
// exactly the complement of the boundary case.
std::optional<BoundaryTransform> biggins_kyprianou(const ModelSpec& spec);

// psi(t) = log E[b e^{-t xi}] = log b + log E[W^{t t*}] - t log E[b W^{t*}].
// Convex, psi(0) = log b, psi(1) = psi'(1) = 0.
double psi(const BoundaryTransform& tr, double t);

bool is_salem(const ModelSpec& spec);

struct VarrhoVarpi {
  double varrho;                 // E[|mu_hat_inf(1)|^2], geometric series to tol
  std::optional<double> varpi;   // b = 2 only: -2 E[(W-1)^2]/pi^2
};
VarrhoVarpi varrho_varpi(const ModelSpec& spec, double tol = 1e-14);

// E[|mu_hat_depth(s)|^2] as the partial martingale-difference series over
// levels m <= depth; depth < 0 means the full series (needs E[W^2] < b).
double second_moment_series(const ModelSpec& spec, std::uint64_t s, int depth, double tol = 1e-14);

// Supremum of feasible alpha in the lower-bound system for the cascade action
// on a base measure with L^p-dimension profile lp_dim and Fourier decay
// exponent kappa. Grid search from inside; returns 0 when infeasible.
double eta_lower_bound(const ModelSpec& spec, const std::function<double(double)>& lp_dim,
                       double kappa);

struct DimensionReport {
  double d_h = 0;
  double d_f = 0;
  SquaredRegime regime = SquaredRegime::Sub;
  bool nondegenerate = false;
  bool salem = false;
  std::optional<BoundaryTransform> boundary;
  std::optional<double> psi_beta;
  std::optional<double> varrho;   // absent when E[W^2] >= b (series diverges)
  std::optional<double> varpi;    // present iff b = 2 and varrho exists
  bool lattice_log_w = false;
  ModelSpec spec;
};

// Throws DegenerateModel unless allow_degenerate, in which case the report
// carries nondegenerate=false with only the analytic continuations filled.
DimensionReport dimension_report(const ModelSpec& spec, bool allow_degenerate = false);

nlohmann::json report_to_json(const DimensionReport& r);

}  // namespace mccm

#endif
