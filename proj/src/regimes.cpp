#include "mccm/regimes.hpp"

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "mccm/errors.hpp"
#include "mccm/numeric.hpp"

namespace mccm {

namespace {
constexpr double kPi = 3.14159265358979323846;

double log_b(const ModelSpec& spec) { return std::log(static_cast<double>(spec.b)); }

void require_nondegenerate(const ModelSpec& spec) {
  if (!(mean_w_log_w(spec.weight) < log_b(spec)))
    throw Error(ErrorCode::DegenerateModel, "E[W log W] >= log b");
}
}  // namespace

const char* regime_name(SquaredRegime r) {
  switch (r) {
    case SquaredRegime::Sub: return "SquaredSub";
    case SquaredRegime::Critical: return "SquaredCritical";
    case SquaredRegime::Super: return "SquaredSuper";
  }
  return "?";
}

SquaredRegime classify_squared_regime(const ModelSpec& spec) {
  const double m2 = moment(spec.weight, 2.0);
  // E[W2 log W2] = 2 E[W^2 log W]/E[W^2] - log E[W^2]
  const double entropy2 = 2.0 * moment_log(spec.weight, 2.0) / m2 - std::log(m2);
  const double gap = entropy2 - log_b(spec);
  if (std::fabs(gap) < 1e-9) return SquaredRegime::Critical;
  return gap < 0 ? SquaredRegime::Sub : SquaredRegime::Super;
}

double hausdorff_dimension(const ModelSpec& spec) {
  require_nondegenerate(spec);
  return 1.0 - mean_w_log_w(spec.weight) / log_b(spec);
}

double fourier_dimension(const ModelSpec& spec) {
  require_nondegenerate(spec);
  const double logb = log_b(spec);
  if (classify_squared_regime(spec) != SquaredRegime::Super)
    return 1.0 - std::log(moment(spec.weight, 2.0)) / logb;

  // objective h(t) = log E[b^{1-t} W^{2t}] / (t log b) on [1/2, 1]
  const auto h = [&](double t) {
    return ((1.0 - t) * logb + std::log(moment(spec.weight, 2.0 * t))) / (t * logb);
  };
  constexpr int kGrid = 64;
  double best_t = 0.5, best = h(0.5);
  for (int i = 1; i <= kGrid; ++i) {
    const double t = 0.5 + 0.5 * i / kGrid;
    const double v = h(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  const double lo = std::max(0.5, best_t - 0.5 / kGrid);
  const double hi = std::min(1.0, best_t + 0.5 / kGrid);
  const double t_min = golden_minimize(h, lo, hi, 1e-12);
  return 1.0 - h(t_min);
}

std::optional<BoundaryTransform> biggins_kyprianou(const ModelSpec& spec) {
  if (spec.weight.kind != WeightKind::LogNormal) {
    const auto [vmax, pmax] = max_atom(spec.weight);
    (void)vmax;
    if (spec.b * pmax >= 1.0) return std::nullopt;
  }
  const auto g = [&](double t) {
    const auto [phi, dphi] = structure_fn(spec, t);
    return t * dphi - phi;
  };
  double lo = 1.0 + 1e-6;
  double hi = 4.0;
  if (g(lo) > 0.0) lo = 1e-6;  // degenerate weights put the root at t* <= 1
  int doublings = 0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (++doublings > 60)
      throw Error(ErrorCode::ConvergenceFailure, "bracket expansion exhausted");
  }
  const double t_star = solve_bracketed(g, lo, hi, 1e-12).x;
  BoundaryTransform tr;
  tr.t_star = t_star;
  tr.beta = 1.0 / t_star;
  tr.log_norm = log_b(spec) + std::log(moment(spec.weight, t_star));
  tr.spec = spec;
  return tr;
}

double psi(const BoundaryTransform& tr, double t) {
  return log_b(tr.spec) + std::log(moment(tr.spec.weight, t * tr.t_star)) - t * tr.log_norm;
}

bool is_salem(const ModelSpec& spec) {
  require_nondegenerate(spec);
  return matches_two_point_law(spec.weight);
}

double second_moment_series(const ModelSpec& spec, std::uint64_t s, int depth, double tol) {
  // kernel_sq(m) = |(e^{i 2 pi s b^-m} - 1) / (2 pi s b^-m)|^2 with the phase
  // reduced mod 1 exactly, so b-adic frequencies vanish identically.
  const auto kernel_sq = [&](int m) -> double {
    const double y = static_cast<double>(s) * std::exp(-m * log_b(spec));  // s b^-m
    std::uint64_t P = 1;
    bool fits = true;
    for (int i = 0; i < m; ++i) {
      if (P > 1000000000000000000ULL / static_cast<std::uint64_t>(spec.b)) {
        fits = false;
        break;
      }
      P *= static_cast<std::uint64_t>(spec.b);
    }
    double frac;
    if (fits && P <= s) {
      const std::uint64_t resid = s % P;
      if (resid == 0) return 0.0;
      frac = static_cast<double>(resid) / static_cast<double>(P);
    } else {
      frac = y;
      if (frac < 1e-9) {
        const double z = kPi * frac;
        return 1.0 - z * z / 3.0;  // sinc^2 Taylor, covers underflow
      }
    }
    const double num = std::sin(kPi * frac);
    return num * num / (kPi * y * kPi * y);
  };

  if (s == 0) throw Error(ErrorCode::BadConfig, "s must be >= 1");
  const double m2 = moment(spec.weight, 2.0);
  const double ratio = m2 / spec.b;
  const double pref = (m2 - 1.0) / spec.b;  // E[(W-1)^2]/b since E[W]=1
  const bool infinite = depth < 0;
  if (infinite && ratio >= 1.0)
    throw Error(ErrorCode::SeriesDiverges, "E[W^2] >= b");

  double sum = 0.0;
  double geom = 1.0;  // ratio^{m-1}
  for (int m = 1; infinite || m <= depth; ++m) {
    sum += pref * geom * kernel_sq(m);
    geom *= ratio;
    if (infinite) {
      const double tail = pref * geom / (1.0 - ratio);  // kernel <= 1
      if (tail < tol * std::max(sum, 1e-300)) break;
      if (m > 1000000) throw Error(ErrorCode::ConvergenceFailure, "series too slow");
    }
  }
  return sum;
}

VarrhoVarpi varrho_varpi(const ModelSpec& spec, double tol) {
  const double m2 = moment(spec.weight, 2.0);
  if (m2 >= spec.b) throw Error(ErrorCode::SeriesDiverges, "E[W^2] >= b");
  VarrhoVarpi out;
  out.varrho = second_moment_series(spec, 1, -1, tol);
  if (spec.b == 2) out.varpi = -2.0 * (m2 - 1.0) / (kPi * kPi);
  return out;
}

double eta_lower_bound(const ModelSpec& spec, const std::function<double(double)>& lp_dim,
                       double kappa) {
  if (kappa <= 0.0) return 0.0;
  const double logb = log_b(spec);
  if (!(mean_w_log_w(spec.weight) / logb < lp_dim(1.0 + 1e-6)))
    throw Error(ErrorCode::AssumptionViolated, "E[W log_b W] >= lim dim_p");

  const auto feasible = [&](double alpha) {
    if (alpha >= kappa) return false;
    for (double q = 4.0; q <= 1024.0; q *= 2.0) {
      const double denom = q * (kappa - alpha) - 1.0;
      if (denom <= 0.0) continue;
      const double p_lo = q * kappa / denom;
      const double p_hi = 2.0;
      if (p_lo >= p_hi) continue;
      constexpr int kP = 64;
      for (int i = 0; i < kP; ++i) {
        const double p = p_lo + (i + 0.5) / kP * (p_hi - p_lo);
        const double tau = p * denom / (q * kappa);
        if (tau <= 1.0) continue;
        if (std::log(moment(spec.weight, p)) / logb < (tau - 1.0) * lp_dim(tau)) return true;
      }
    }
    return false;
  };

  constexpr double kStep = 1e-3;
  double best = -1.0;
  for (double a = 0.0; a < kappa; a += kStep)
    if (feasible(a)) best = a;
  if (best < 0.0) return 0.0;
  // local refinement between the last feasible point and the first failure
  double lo = best, hi = std::min(best + kStep, kappa);
  for (int it = 0; it < 20; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

DimensionReport dimension_report(const ModelSpec& spec, bool allow_degenerate) {
  DimensionReport r;
  r.spec = spec;
  r.nondegenerate = mean_w_log_w(spec.weight) < log_b(spec);
  r.regime = classify_squared_regime(spec);
  r.lattice_log_w = is_lattice_log(spec.weight);
  r.d_h = 1.0 - mean_w_log_w(spec.weight) / log_b(spec);
  if (!r.nondegenerate) {
    if (!allow_degenerate) throw Error(ErrorCode::DegenerateModel, "E[W log W] >= log b");
    r.d_f = std::nan("");
    return r;
  }
  r.d_f = fourier_dimension(spec);
  r.salem = is_salem(spec);
  r.boundary = biggins_kyprianou(spec);
  if (r.boundary) r.psi_beta = psi(*r.boundary, r.boundary->beta);
  if (moment(spec.weight, 2.0) < spec.b) {
    const auto vv = varrho_varpi(spec, 1e-14);
    r.varrho = vv.varrho;
    r.varpi = vv.varpi;
  }
  return r;
}

nlohmann::json report_to_json(const DimensionReport& r) {
  nlohmann::json j;
  j["d_h"] = r.d_h;
  j["d_f"] = std::isnan(r.d_f) ? nlohmann::json() : nlohmann::json(r.d_f);
  j["regime"] = regime_name(r.regime);
  j["salem"] = r.salem;
  j["beta"] = r.boundary ? nlohmann::json(r.boundary->beta) : nlohmann::json();
  j["psi_beta"] = r.psi_beta ? nlohmann::json(*r.psi_beta) : nlohmann::json();
  j["varrho"] = r.varrho ? nlohmann::json(*r.varrho) : nlohmann::json();
  j["varpi"] = r.varpi ? nlohmann::json(*r.varpi) : nlohmann::json();
  j["nondegenerate"] = r.nondegenerate;
  j["lattice_log_w"] = r.lattice_log_w;
  j["b"] = r.spec.b;
  j["model"] = r.spec.weight.to_json();
  return j;
}

}  // namespace mccm
