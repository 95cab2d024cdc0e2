#include "mccm/cascade.hpp"

#include <cmath>
#include <limits>

#include "mccm/errors.hpp"
#include "mccm/numeric.hpp"
#include "mccm/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mccm {

namespace {
const std::string kLebesgueTag = "lebesgue";
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const std::string& CascadeField::base_tag() const { return base ? base->tag : kLebesgueTag; }

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

BaseMeasure BaseMeasure::lebesgue(int b) {
  BaseMeasure m;
  m.tag = kLebesgueTag;
  m.cylinder_mass = [b](int level, std::uint64_t) {
    return std::pow(static_cast<double>(b), -level);
  };
  return m;
}

BaseMeasure BaseMeasure::blocks(int b, int level, std::vector<double> block_masses) {
  if (block_masses.size() != pow_u64(static_cast<std::uint64_t>(b), level))
    throw Error(ErrorCode::BadConfig, "blocks base needs b^level masses");
  auto masses = std::make_shared<std::vector<double>>(std::move(block_masses));
  BaseMeasure m;
  m.tag = "blocks@" + std::to_string(level);
  m.cylinder_mass = [b, level, masses](int m_level, std::uint64_t idx) {
    if (m_level >= level) {
      const std::uint64_t shrink = pow_u64(static_cast<std::uint64_t>(b), m_level - level);
      return (*masses)[idx / shrink] / static_cast<double>(shrink);
    }
    const std::uint64_t widen = pow_u64(static_cast<std::uint64_t>(b), level - m_level);
    double s = 0.0;
    for (std::uint64_t j = idx * widen; j < (idx + 1) * widen; ++j) s += (*masses)[j];
    return s;
  };
  return m;
}

namespace {

// Per-node value fed to the product/sum sweeps. Log-space and the BRW walk
// both use the additive form; ln 0 = -inf and xi(0) = +inf fall out of it.
struct NodeDraw {
  const WeightModel& model;
  std::uint64_t seed;
  TailSalt salt;

  std::uint64_t stream_for(int level) const {
    return level > salt.from_level ? salt.salt : 0;
  }
  double weight(int level, std::uint64_t heap) const {
    return sample_weight(model, seed, heap, stream_for(level));
  }
  double log_weight(int level, std::uint64_t heap) const {
    // drawn natively so the lognormal path avoids exp+log round trips
    const double u = uniform_open01(keyed_hash(seed, heap, stream_for(level)));
    switch (model.kind) {
      case WeightKind::LogNormal:
        return model.sigma * inverse_normal_cdf(u) - 0.5 * model.sigma * model.sigma;
      case WeightKind::TwoPoint:
        return u < model.x ? -std::log(model.x) : -kInf;
      case WeightKind::Discrete: {
        double acc = 0.0;
        for (const auto& [v, p] : model.atoms) {
          acc += p;
          if (u < acc) return v > 0.0 ? std::log(v) : -kInf;
        }
        const double v = model.atoms.back().first;
        return v > 0.0 ? std::log(v) : -kInf;
      }
    }
    return -kInf;
  }
};

// Log-space generator specialized to the lognormal family: per level, the
// uniform draws land in an array, the central inverse CDF runs as one
// branch-free (auto-vectorizable) pass, and the rare tails get a scalar
// fixup. Shares inverse_normal_central with the scalar sampler, so leaves
// match the per-node reference bit-for-bit.
void fill_lognormal_log_products(std::vector<double>& buf, const ModelSpec& spec,
                                 int depth, std::uint64_t seed, TailSalt salt) {
  const int b = spec.b;
  const double sigma = spec.weight.sigma;
  const double half = 0.5 * spec.weight.sigma * spec.weight.sigma;
  std::vector<double> ubuf, zbuf, parent;
  std::uint64_t children = static_cast<std::uint64_t>(b);
  for (int j = 1; j <= depth; ++j, children *= static_cast<std::uint64_t>(b)) {
    const std::uint64_t heap0 = pow_u64(static_cast<std::uint64_t>(b), j);
    const std::uint64_t stream = j > salt.from_level ? salt.salt : 0;
    ubuf.resize(children);
    zbuf.resize(children);
    const bool wide = children >= 4096;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (wide)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(children); ++i)
      ubuf[static_cast<std::uint64_t>(i)] =
          uniform_open01(keyed_hash(seed, heap0 + static_cast<std::uint64_t>(i), stream));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (wide)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(children); ++i)
      zbuf[static_cast<std::uint64_t>(i)] = inverse_normal_central(ubuf[static_cast<std::uint64_t>(i)] - 0.5);
    for (std::uint64_t i = 0; i < children; ++i)
      if (std::fabs(ubuf[i] - 0.5) > kInverseNormalCentralHalfWidth)
        zbuf[i] = inverse_normal_cdf(ubuf[i]);
    if (j == 1) {
      for (int c = 0; c < b; ++c) buf[c] = sigma * zbuf[c] - half;
      continue;
    }
    const std::uint64_t parents = children / static_cast<std::uint64_t>(b);
    parent.resize(parents);
    std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(parents), parent.begin());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (wide)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(parents); ++k) {
      const double acc = parent[static_cast<std::uint64_t>(k)];
      const std::uint64_t child0 = static_cast<std::uint64_t>(k) * b;
      for (int c = 0; c < b; ++c) buf[child0 + c] = acc + (sigma * zbuf[child0 + c] - half);
    }
  }
}

void check_cap(int b, int depth, std::uint64_t max_leaves) {
  std::uint64_t n = 1;
  for (int i = 0; i < depth; ++i) {
    n *= static_cast<std::uint64_t>(b);
    if (n > max_leaves)
      throw Error(ErrorCode::DepthTooLarge,
                  "b^depth exceeds the leaf cap of " + std::to_string(max_leaves));
  }
}

bool log_space_wanted(const ModelSpec& spec, int depth) {
  // lognormal draws cost one exponential either way; deferring it to the
  // leaves removes it from every interior node
  if (spec.weight.kind == WeightKind::LogNormal) return true;
  return depth > 40.0 / std::log2(static_cast<double>(spec.b));
}

// Expands buf (level j products in buf[0..b^j)) to level j+1, drawing child
// weights. Combine is * for products, + for log/walk accumulation. The
// in-place downward order and the snapshot-parallel order produce identical
// values; zero (or -inf/+inf) subtrees are absorbed without drawing.
template <bool Additive, class Value>
void expand_level(std::vector<double>& buf, std::vector<double>& scratch, int b, int j,
                  std::uint64_t parents, const Value& value, double absorbing) {
  const std::uint64_t heap0 = pow_u64(static_cast<std::uint64_t>(b), j + 1);
  const bool parallel_worthwhile = parents >= 4096;
  if (parallel_worthwhile) {
    scratch.resize(parents);
    std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(parents), scratch.begin());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(parents); ++k) {
      const double parent = scratch[static_cast<std::uint64_t>(k)];
      const std::uint64_t child0 = static_cast<std::uint64_t>(k) * b;
      if (parent == absorbing) {
        for (int c = 0; c < b; ++c) buf[child0 + c] = absorbing;
        continue;
      }
      for (int c = 0; c < b; ++c) {
        const double v = value(j + 1, heap0 + child0 + c);
        buf[child0 + c] = Additive ? parent + v : parent * v;
      }
    }
  } else {
    for (std::uint64_t k = parents; k-- > 0;) {
      const double parent = buf[k];
      const std::uint64_t child0 = k * b;
      if (parent == absorbing) {
        for (int c = b; c-- > 0;) buf[child0 + c] = absorbing;
        continue;
      }
      for (int c = b; c-- > 0;) {
        const double v = value(j + 1, heap0 + child0 + c);
        buf[child0 + c] = Additive ? parent + v : parent * v;
      }
    }
  }
}

}  // namespace

CascadeField sample_field(const ModelSpec& spec, int depth, std::uint64_t seed,
                          std::shared_ptr<const BaseMeasure> base, TailSalt salt,
                          std::uint64_t max_leaves) {
  check_cap(spec.b, depth, max_leaves);
  CascadeField f;
  f.spec = spec;
  f.depth = depth;
  f.seed = seed;
  f.salt = salt;
  f.base = base;

  const std::uint64_t n = pow_u64(static_cast<std::uint64_t>(spec.b), depth);
  const bool log_space = log_space_wanted(spec, depth);
  const NodeDraw draw{spec.weight, seed, salt};

  std::vector<double> buf(n, log_space ? 0.0 : 1.0), scratch;
  if (depth > 0) {
    if (spec.weight.kind == WeightKind::LogNormal) {
      fill_lognormal_log_products(buf, spec, depth, seed, salt);
    } else {
      // level 1 directly, then expand
      for (int c = 0; c < spec.b; ++c) {
        const std::uint64_t heap = heap_index(spec.b, 1, c);
        buf[c] = log_space ? draw.log_weight(1, heap) : draw.weight(1, heap);
      }
      std::uint64_t parents = static_cast<std::uint64_t>(spec.b);
      for (int j = 1; j < depth; ++j) {
        if (log_space)
          expand_level<true>(buf, scratch, spec.b, j, parents,
                             [&](int lvl, std::uint64_t h) { return draw.log_weight(lvl, h); },
                             -kInf);
        else
          expand_level<false>(buf, scratch, spec.b, j, parents,
                              [&](int lvl, std::uint64_t h) { return draw.weight(lvl, h); }, 0.0);
        parents *= static_cast<std::uint64_t>(spec.b);
      }
    }
  }

  f.masses.resize(n);
  if (base) {
    const auto& cyl = base->cylinder_mass;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(n); ++k) {
      const double prod = log_space ? sampler_exp(buf[static_cast<std::uint64_t>(k)])
                                    : buf[static_cast<std::uint64_t>(k)];
      f.masses[static_cast<std::uint64_t>(k)] = cyl(depth, static_cast<std::uint64_t>(k)) * prod;
    }
  } else {
    const double leb = std::pow(static_cast<double>(spec.b), -depth);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(n); ++k) {
      const double prod = log_space ? sampler_exp(buf[static_cast<std::uint64_t>(k)])
                                    : buf[static_cast<std::uint64_t>(k)];
      f.masses[static_cast<std::uint64_t>(k)] = leb * prod;
    }
  }
  return f;
}

CascadeField sample_field_serial(const ModelSpec& spec, int depth, std::uint64_t seed,
                                 std::shared_ptr<const BaseMeasure> base, TailSalt salt,
                                 std::uint64_t max_leaves) {
  check_cap(spec.b, depth, max_leaves);
  CascadeField f;
  f.spec = spec;
  f.depth = depth;
  f.seed = seed;
  f.salt = salt;
  f.base = base;
  const std::uint64_t n = pow_u64(static_cast<std::uint64_t>(spec.b), depth);
  const bool log_space = log_space_wanted(spec, depth);
  const NodeDraw draw{spec.weight, seed, salt};
  const BaseMeasure leb = BaseMeasure::lebesgue(spec.b);
  const auto& cyl = base ? base->cylinder_mass : leb.cylinder_mass;
  f.masses.resize(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    double acc = log_space ? 0.0 : 1.0;
    std::uint64_t level_pow = 1;
    for (int j = 1; j <= depth; ++j) level_pow *= static_cast<std::uint64_t>(spec.b);
    // ancestor at level j has in-level index k / b^{depth-j}
    std::uint64_t divisor = level_pow;
    for (int j = 1; j <= depth; ++j) {
      divisor /= static_cast<std::uint64_t>(spec.b);
      const std::uint64_t idx = k / divisor;
      const std::uint64_t heap = heap_index(spec.b, j, idx);
      if (log_space)
        acc += draw.log_weight(j, heap);
      else
        acc *= draw.weight(j, heap);
    }
    f.masses[k] = cyl(depth, k) * (log_space ? sampler_exp(acc) : acc);
  }
  return f;
}

CascadeField lebesgue_fixture(int b, int depth) {
  CascadeField f;
  f.spec.b = b;
  f.spec.weight = WeightModel::discrete({{1.0, 1.0}});  // constant 1, validation bypassed
  f.depth = depth;
  f.seed = 0;
  const std::uint64_t n = pow_u64(static_cast<std::uint64_t>(b), depth);
  f.masses.assign(n, std::pow(static_cast<double>(b), -depth));
  return f;
}

CascadeField refine(const CascadeField& field, int extra) {
  if (extra < 0) throw Error(ErrorCode::BadConfig, "extra must be >= 0");
  if (extra == 0) return field;
  return sample_field(field.spec, field.depth + extra, field.seed, field.base, field.salt);
}

CascadeField restrict_depth(const CascadeField& field, int m) {
  if (m < 0 || m > field.depth) throw Error(ErrorCode::BadConfig, "restrict level out of range");
  return sample_field(field.spec, m, field.seed, field.base, field.salt);
}

double total_mass(const CascadeField& field) { return tree_sum(field.masses); }

double squared_mass(const CascadeField& field) {
  if (field.base) throw Error(ErrorCode::BadConfig, "squared_mass is defined for the Lebesgue base");
  const auto stats = sweep_level_products(field.spec, field.depth, field.seed, field.salt,
                                          WeightTransform::SquaredNormalized);
  return stats.sum[field.depth] * std::pow(static_cast<double>(field.spec.b), -field.depth);
}

std::vector<double> brw_values(const CascadeField& field, const BoundaryTransform& tr) {
  if (tr.spec.b != field.spec.b)
    throw Error(ErrorCode::BadConfig, "transform and field disagree on b");
  const int depth = field.depth;
  const int b = field.spec.b;
  const std::uint64_t n = pow_u64(static_cast<std::uint64_t>(b), depth);
  const NodeDraw draw{field.spec.weight, field.seed, field.salt};
  const auto xi = [&](int lvl, std::uint64_t heap) {
    const double lw = draw.log_weight(lvl, heap);
    return lw == -kInf ? kInf : -tr.t_star * lw + tr.log_norm;
  };
  std::vector<double> buf(n, 0.0), scratch;
  if (depth > 0) {
    for (int c = 0; c < b; ++c) buf[c] = xi(1, heap_index(b, 1, c));
    std::uint64_t parents = static_cast<std::uint64_t>(b);
    for (int j = 1; j < depth; ++j) {
      expand_level<true>(buf, scratch, b, j, parents, xi, kInf);
      parents *= static_cast<std::uint64_t>(b);
    }
  }
  return buf;
}

double derivative_martingale(const CascadeField& field, const BoundaryTransform& tr) {
  const auto v = brw_values(field, tr);
  return blocked_sum(v.size(), [&](std::size_t k) {
    return std::isfinite(v[k]) ? v[k] * std::exp(-v[k]) : 0.0;
  });
}

double partition_function(const CascadeField& field, const BoundaryTransform& tr, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::BadConfig, "gamma must be > 0");
  const auto v = brw_values(field, tr);
  return blocked_sum(v.size(), [&](std::size_t k) {
    return std::isfinite(v[k]) ? std::exp(-gamma * v[k]) : 0.0;
  });
}

LevelProductStats sweep_level_products(const ModelSpec& spec, int depth, std::uint64_t seed,
                                       TailSalt salt, WeightTransform kind,
                                       std::uint64_t max_leaves) {
  check_cap(spec.b, depth, max_leaves);
  const int b = spec.b;
  const NodeDraw draw{spec.weight, seed, salt};
  const double m2 = moment(spec.weight, 2.0);
  const auto value = [&](int lvl, std::uint64_t heap) {
    const double w = draw.weight(lvl, heap);
    return kind == WeightTransform::Plain ? w : w * w / m2;
  };
  LevelProductStats out;
  out.sum.assign(depth + 1, 0.0);
  out.sum_sq.assign(depth + 1, 0.0);
  out.sum_plogp.assign(depth + 1, 0.0);
  out.sum[0] = 1.0;
  out.sum_sq[0] = 1.0;
  out.sum_plogp[0] = 0.0;
  if (depth == 0) return out;

  std::vector<double> buf(pow_u64(static_cast<std::uint64_t>(b), depth)), scratch;
  for (int c = 0; c < b; ++c) buf[c] = value(1, heap_index(b, 1, c));
  std::uint64_t level_size = static_cast<std::uint64_t>(b);
  for (int j = 1;; ++j) {
    out.sum[j] = blocked_sum(level_size, [&](std::size_t k) { return buf[k]; });
    out.sum_sq[j] = blocked_sum(level_size, [&](std::size_t k) { return buf[k] * buf[k]; });
    out.sum_plogp[j] = blocked_sum(level_size, [&](std::size_t k) {
      return buf[k] > 0.0 ? buf[k] * std::log(buf[k]) : 0.0;
    });
    if (j == depth) break;
    expand_level<false>(buf, scratch, b, j, level_size, value, 0.0);
    level_size *= static_cast<std::uint64_t>(b);
  }
  return out;
}

LevelWalkStats sweep_level_walk(const ModelSpec& spec, int depth, std::uint64_t seed, TailSalt salt,
                                const BoundaryTransform& tr, std::span<const double> gammas,
                                std::uint64_t max_leaves) {
  check_cap(spec.b, depth, max_leaves);
  const int b = spec.b;
  const NodeDraw draw{spec.weight, seed, salt};
  const auto xi = [&](int lvl, std::uint64_t heap) {
    const double lw = draw.log_weight(lvl, heap);
    return lw == -kInf ? kInf : -tr.t_star * lw + tr.log_norm;
  };
  LevelWalkStats out;
  out.partition.assign(gammas.size(), std::vector<double>(depth + 1, 0.0));
  out.derivative.assign(depth + 1, 0.0);
  for (std::size_t g = 0; g < gammas.size(); ++g) out.partition[g][0] = 1.0;
  out.derivative[0] = 0.0;
  if (depth == 0) return out;

  std::vector<double> buf(pow_u64(static_cast<std::uint64_t>(b), depth)), scratch;
  for (int c = 0; c < b; ++c) buf[c] = xi(1, heap_index(b, 1, c));
  std::uint64_t level_size = static_cast<std::uint64_t>(b);
  for (int j = 1;; ++j) {
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const double gamma = gammas[g];
      out.partition[g][j] = blocked_sum(level_size, [&](std::size_t k) {
        return std::isfinite(buf[k]) ? std::exp(-gamma * buf[k]) : 0.0;
      });
    }
    out.derivative[j] = blocked_sum(level_size, [&](std::size_t k) {
      return std::isfinite(buf[k]) ? buf[k] * std::exp(-buf[k]) : 0.0;
    });
    if (j == depth) break;
    expand_level<true>(buf, scratch, b, j, level_size, xi, kInf);
    level_size *= static_cast<std::uint64_t>(b);
  }
  return out;
}

}  // namespace mccm
