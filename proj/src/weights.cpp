#include "mccm/weights.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mccm/errors.hpp"
#include "mccm/rng.hpp"

namespace mccm {

WeightModel WeightModel::log_normal(double sigma) {
  WeightModel m;
  m.kind = WeightKind::LogNormal;
  m.sigma = sigma;
  return m;
}

WeightModel WeightModel::two_point(double x) {
  WeightModel m;
  m.kind = WeightKind::TwoPoint;
  m.x = x;
  return m;
}

WeightModel WeightModel::discrete(std::vector<std::pair<double, double>> atoms) {
  WeightModel m;
  m.kind = WeightKind::Discrete;
  m.atoms = std::move(atoms);
  return m;
}

WeightModel WeightModel::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lognormal") return log_normal(j.at("sigma").get<double>());
  if (kind == "twopoint") return two_point(j.at("x").get<double>());
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms")) atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    return discrete(std::move(atoms));
  }
  throw Error(ErrorCode::BadConfig, "unknown weight kind '" + kind + "'");
}

nlohmann::json WeightModel::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case WeightKind::LogNormal:
      j["kind"] = "lognormal";
      j["sigma"] = sigma;
      break;
    case WeightKind::TwoPoint:
      j["kind"] = "twopoint";
      j["x"] = x;
      break;
    case WeightKind::Discrete: {
      j["kind"] = "discrete";
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [v, p] : atoms) arr.push_back({v, p});
      j["atoms"] = arr;
      break;
    }
  }
  return j;
}

std::string WeightModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case WeightKind::LogNormal: os << "lognormal(sigma=" << sigma << ")"; break;
    case WeightKind::TwoPoint: os << "twopoint(x=" << x << ")"; break;
    case WeightKind::Discrete:
      os << "discrete(";
      for (std::size_t i = 0; i < atoms.size(); ++i)
        os << (i ? "," : "") << atoms[i].first << ":" << atoms[i].second;
      os << ")";
      break;
  }
  return os.str();
}

namespace {

// Atoms merged by value, zero-prob entries dropped, sorted by value.
std::vector<std::pair<double, double>> canonical_atoms(const WeightModel& m) {
  std::map<double, double> merged;
  if (m.kind == WeightKind::TwoPoint) {
    merged[1.0 / m.x] += m.x;
    if (m.x < 1.0) merged[0.0] += 1.0 - m.x;
  } else {
    for (const auto& [v, p] : m.atoms) merged[v] += p;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [v, p] : merged)
    if (p > 0.0) out.emplace_back(v, p);
  return out;
}

}  // namespace

WeightModel validate(const WeightModel& m) {
  constexpr double kTol = 1e-12;
  switch (m.kind) {
    case WeightKind::LogNormal:
      if (!(m.sigma > 0.0))
        throw Error(ErrorCode::ConstantWeight, "lognormal needs sigma > 0");
      return m;
    case WeightKind::TwoPoint:
      if (!(m.x > 0.0 && m.x <= 1.0))
        throw Error(ErrorCode::BadConfig, "twopoint needs x in (0,1]");
      if (m.x == 1.0)
        throw Error(ErrorCode::ConstantWeight, "twopoint x=1 is the constant weight");
      return m;
    case WeightKind::Discrete: {
      if (m.atoms.empty()) throw Error(ErrorCode::BadConfig, "discrete needs atoms");
      double mean = 0.0, psum = 0.0;
      for (const auto& [v, p] : m.atoms) {
        if (v < 0.0) throw Error(ErrorCode::NegativeAtom, "atom value < 0");
        if (!(p > 0.0)) throw Error(ErrorCode::BadConfig, "atom prob must be > 0");
        mean += v * p;
        psum += p;
      }
      if (std::fabs(psum - 1.0) > kTol)
        throw Error(ErrorCode::BadConfig, "atom probabilities do not sum to 1");
      if (std::fabs(mean - 1.0) > kTol)
        throw Error(ErrorCode::MeanNotOne, "mean is " + std::to_string(mean));
      if (canonical_atoms(m).size() < 2)
        throw Error(ErrorCode::ConstantWeight, "needs two distinct atom values");
      return m;
    }
  }
  throw Error(ErrorCode::BadConfig, "unreachable");
}

double moment(const WeightModel& m, double t) {
  if (t == 0.0) return 1.0;  // 0^0 = 1 and every atom contributes p
  switch (m.kind) {
    case WeightKind::LogNormal:
      return std::exp(0.5 * m.sigma * m.sigma * t * (t - 1.0));
    case WeightKind::TwoPoint:
      return std::pow(m.x, 1.0 - t);
    case WeightKind::Discrete: {
      double s = 0.0;
      for (const auto& [v, p] : m.atoms)
        if (v > 0.0) s += p * std::pow(v, t);
      return s;
    }
  }
  return 0.0;
}

double moment_log(const WeightModel& m, double t) {
  switch (m.kind) {
    case WeightKind::LogNormal:
      // d/dt of exp(sigma^2 t(t-1)/2)
      return moment(m, t) * 0.5 * m.sigma * m.sigma * (2.0 * t - 1.0);
    case WeightKind::TwoPoint:
      return std::pow(m.x, 1.0 - t) * std::log(1.0 / m.x);
    case WeightKind::Discrete: {
      double s = 0.0;
      for (const auto& [v, p] : m.atoms)
        if (v > 0.0) s += p * std::pow(v, t) * std::log(v);
      return s;
    }
  }
  return 0.0;
}

double mean_w_log_w(const WeightModel& m) { return moment_log(m, 1.0); }

StructureFn structure_fn(const ModelSpec& spec, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::BadConfig, "structure_fn needs t > 0");
  const double mt = moment(spec.weight, t);
  if (!(mt > 0.0)) throw Error(ErrorCode::ZeroMoment, "E[W^t] = 0");
  const double logb = std::log(static_cast<double>(spec.b));
  return {std::log(mt) - (t - 1.0) * logb, moment_log(spec.weight, t) / mt - logb};
}

Conditions check_conditions(const ModelSpec& spec, double p) {
  const double logb = std::log(static_cast<double>(spec.b));
  return {mean_w_log_w(spec.weight) < logb,
          moment(spec.weight, p) < std::pow(static_cast<double>(spec.b), p - 1.0)};
}

double sample_weight(const WeightModel& m, std::uint64_t seed, std::uint64_t node,
                     std::uint64_t stream) {
  const double u = uniform_open01(keyed_hash(seed, node, stream));
  switch (m.kind) {
    case WeightKind::LogNormal:
      return sampler_exp(m.sigma * inverse_normal_cdf(u) - 0.5 * m.sigma * m.sigma);
    case WeightKind::TwoPoint:
      return u < m.x ? 1.0 / m.x : 0.0;
    case WeightKind::Discrete: {
      double acc = 0.0;
      for (const auto& [v, p] : m.atoms) {
        acc += p;
        if (u < acc) return v;
      }
      return m.atoms.back().first;
    }
  }
  return 0.0;
}

std::pair<double, double> max_atom(const WeightModel& m) {
  if (m.kind == WeightKind::LogNormal)
    throw Error(ErrorCode::BadConfig, "lognormal is unbounded");
  const auto atoms = canonical_atoms(m);
  return atoms.back();
}

bool is_lattice_log(const WeightModel& m) {
  if (m.kind == WeightKind::LogNormal) return false;
  const auto atoms = canonical_atoms(m);
  std::vector<double> logs;
  for (const auto& [v, p] : atoms)
    if (v > 0.0) logs.push_back(std::log(v));
  if (logs.size() <= 2) return true;  // <= 2 support points always lie on a progression
  constexpr double kTol = 1e-9;
  double g = 0.0;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    double a = std::fabs(logs[i] - logs[0]);
    // real-valued gcd by Euclid with round-to-nearest remainders
    double b = g;
    while (b > kTol) {
      const double r = std::fabs(a - b * std::round(a / b));
      a = b;
      b = r;
    }
    g = a;
  }
  if (g < kTol) return true;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    const double d = (logs[i] - logs[0]) / g;
    if (std::fabs(d - std::round(d)) > 1e-6) return false;
  }
  return true;
}

bool matches_two_point_law(const WeightModel& m, double* x_out) {
  if (m.kind == WeightKind::LogNormal) return false;
  const auto atoms = canonical_atoms(m);
  double x = 0.0, value = 0.0;
  int positive = 0;
  for (const auto& [v, p] : atoms) {
    if (v > 0.0) {
      ++positive;
      value = v;
      x = p;
    }
  }
  if (positive != 1) return false;
  if (std::fabs(value * x - 1.0) > 1e-12) return false;  // forced by E[W]=1, kept as a guard
  if (x_out) *x_out = x;
  return true;
}

}  // namespace mccm
