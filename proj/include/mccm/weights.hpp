#ifndef MCCM_WEIGHTS_HPP
#define MCCM_WEIGHTS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mccm {

enum class WeightKind { LogNormal, TwoPoint, Discrete };

// A random weight W >= 0 with E[W] = 1. All analytic functionals below are
// exact closed forms; the sampler is a pure function of (seed, node, stream).
struct WeightModel {
  WeightKind kind = WeightKind::TwoPoint;
  double sigma = 0.0;                                // LogNormal: W = exp(sigma N - sigma^2/2)
  double x = 0.0;                                    // TwoPoint: P(W = 1/x) = x, P(W = 0) = 1 - x
  std::vector<std::pair<double, double>> atoms;      // Discrete: (value, prob)

  static WeightModel log_normal(double sigma);
  static WeightModel two_point(double x);
  static WeightModel discrete(std::vector<std::pair<double, double>> atoms);

  static WeightModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string describe() const;
};

struct ModelSpec {
  WeightModel weight;
  int b = 2;  // branching base, >= 2
};

// Checks E[W] = 1 (to 1e-12), non-constancy, and atom sanity. Discrete
// models are rejected rather than renormalized when the mean is off.
WeightModel validate(const WeightModel& m);

// E[W^t] for t >= 0, with the conventions 0^t = 0 (t > 0) and 0^0 = 1.
double moment(const WeightModel& m, double t);

// E[W^t log W] (natural log), 0*log 0 = 0.
double moment_log(const WeightModel& m, double t);

// E[W log W].
double mean_w_log_w(const WeightModel& m);

struct StructureFn {
  double phi;        // log E[W^t] - (t-1) log b
  double phi_prime;  // E[W^t log W]/E[W^t] - log b
};
StructureFn structure_fn(const ModelSpec& spec, double t);

struct Conditions {
  bool nondegenerate;  // E[W log W] < log b
  bool lp_bounded;     // E[W^p] < b^(p-1)
};
Conditions check_conditions(const ModelSpec& spec, double p);

// One weight draw for a tree node. `stream` carries the tail salt used by
// conditional resampling; 0 everywhere else.
double sample_weight(const WeightModel& m, std::uint64_t seed, std::uint64_t node,
                     std::uint64_t stream = 0);

// Largest atom value and its total probability (Discrete/TwoPoint); used by
// the boundary-case criterion. Throws for LogNormal (unbounded).
std::pair<double, double> max_atom(const WeightModel& m);

// Diagnostic: whether log W is supported on an arithmetic progression.
// Exact for atomic models; LogNormal is continuous, hence false.
bool is_lattice_log(const WeightModel& m);

// True when the law of W equals the two-point family P(W=1/x)=x, P(W=0)=1-x
// for some x, regardless of how the model was specified.
bool matches_two_point_law(const WeightModel& m, double* x_out = nullptr);

}  // namespace mccm

#endif
