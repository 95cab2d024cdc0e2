#ifndef MCCM_CASCADE_HPP
#define MCCM_CASCADE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mccm/regimes.hpp"
#include "mccm/weights.hpp"

namespace mccm {

// Mass assignment for b-adic cylinders; children must sum to the parent.
struct BaseMeasure {
  std::string tag;
  std::function<double(int level, std::uint64_t index)> cylinder_mass;

  static BaseMeasure lebesgue(int b);
  // Piecewise-constant density over the b^level blocks of the given level.
  static BaseMeasure blocks(int b, int level, std::vector<double> block_masses);
};

// Nodes strictly deeper than from_level draw with stream = salt; everything
// else uses stream 0. Lets conditional tests pin a prefix and resample tails.
struct TailSalt {
  std::uint64_t salt = 0;
  int from_level = 0;
};

constexpr std::uint64_t kDefaultLeafCap = std::uint64_t(1) << 25;

// One realization of the level-n cascade: masses[k] = base(I_u) prod W(u|_j)
// over the k-th b-adic interval, left to right. Everything is a pure
// function of (spec, depth, seed, salt), so fields regenerate exactly.
struct CascadeField {
  ModelSpec spec;
  int depth = 0;
  std::uint64_t seed = 0;
  TailSalt salt;
  std::shared_ptr<const BaseMeasure> base;  // null = Lebesgue
  std::vector<double> masses;

  std::uint64_t leaves() const { return masses.size(); }
  const std::string& base_tag() const;
};

std::uint64_t pow_u64(std::uint64_t base, int exp);

// Heap encoding of the node at `level` with left-to-right index `idx`.
inline std::uint64_t heap_index(int b, int level, std::uint64_t idx) {
  return pow_u64(static_cast<std::uint64_t>(b), level) + idx;
}

CascadeField sample_field(const ModelSpec& spec, int depth, std::uint64_t seed,
                          std::shared_ptr<const BaseMeasure> base = nullptr, TailSalt salt = {},
                          std::uint64_t max_leaves = kDefaultLeafCap);

// Naive per-leaf ancestor walk; bit-identical to sample_field by
// construction and kept as the reference implementation.
CascadeField sample_field_serial(const ModelSpec& spec, int depth, std::uint64_t seed,
                                 std::shared_ptr<const BaseMeasure> base = nullptr,
                                 TailSalt salt = {}, std::uint64_t max_leaves = kDefaultLeafCap);

// Uniform field of the given depth with every weight forced to 1 (validation
// bypass); the Lebesgue fixture used by tests and estimator baselines.
CascadeField lebesgue_fixture(int b, int depth);

// Same realization, `extra` levels deeper.
CascadeField refine(const CascadeField& field, int extra);

// The depth-m field of the same realization (m <= depth), bit-for-bit.
CascadeField restrict_depth(const CascadeField& field, int m);

double total_mass(const CascadeField& field);

// Total mass of the squared-weight cascade M_n(W2), W2 = W^2/E[W^2],
// recomputed from the same weight draws. Lebesgue base only.
double squared_mass(const CascadeField& field);

// Branching random walk values V(u) = sum_j xi(u|_j) at the leaves, with
// xi = -t* log W + log E[b W^{t*}]; zero-weight leaves carry +infinity.
std::vector<double> brw_values(const CascadeField& field, const BoundaryTransform& tr);

// D_n = sum_u V(u) e^{-V(u)}; (+inf) e^{-inf} = 0.
double derivative_martingale(const CascadeField& field, const BoundaryTransform& tr);

// Z_{n,gamma} = sum_u e^{-gamma V(u)}.
double partition_function(const CascadeField& field, const BoundaryTransform& tr, double gamma);

// Per-level sums of weight products, collected in one sweep without
// materializing intermediate fields. Index j holds level-j values, j = 0..depth.
struct LevelProductStats {
  std::vector<double> sum;        // sum over |u|=j of prod f(W)
  std::vector<double> sum_sq;     // sum of squares of the products
  std::vector<double> sum_plogp;  // sum of p log p over products p (0 log 0 = 0)
};

enum class WeightTransform { Plain, SquaredNormalized };

LevelProductStats sweep_level_products(const ModelSpec& spec, int depth, std::uint64_t seed,
                                       TailSalt salt, WeightTransform kind,
                                       std::uint64_t max_leaves = kDefaultLeafCap);

// Per-level BRW statistics: partition sums for each gamma and the derivative
// martingale, again in one sweep.
struct LevelWalkStats {
  std::vector<std::vector<double>> partition;  // [gamma][level]
  std::vector<double> derivative;              // [level]
};

LevelWalkStats sweep_level_walk(const ModelSpec& spec, int depth, std::uint64_t seed, TailSalt salt,
                                const BoundaryTransform& tr, std::span<const double> gammas,
                                std::uint64_t max_leaves = kDefaultLeafCap);

}  // namespace mccm

#endif
