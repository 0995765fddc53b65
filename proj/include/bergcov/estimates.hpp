#pragma once

// Region decompositions and sampled constants for the weighted kernel estimates.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "bergcov/kernels.hpp"

namespace bergcov {

/// E(S, δ): pairs with |⟨z, e_Y⟩| ≥ δ and |⟨w, e_Y⟩| ≥ δ for every Y ∉ S.
struct RegionSpec {
  std::vector<Hyperplane> hyperplanes;
  IndexSet S;
  double delta = 0.0;

  static RegionSpec make(const ReflectionGroup& group, IndexSet S, double delta);
};

bool region_membership(const RegionSpec& spec, const Vec& z, const Vec& w);
/// Largest δ with (z, w) ∈ E(S, δ); +∞ when S contains every hyperplane.
double region_margin(std::span<const Hyperplane> hyperplanes, const IndexSet& S, const Vec& z, const Vec& w);
/// (1 − ‖z‖) + (1 − ‖w‖) + min_g ‖g.z − w‖.
double reg_margin(const ReflectionGroup& group, const Vec& z, const Vec& w);

/// The first hyperplane orbit against the union of the others. Throws
/// InvalidArgument when the group has fewer than two orbits.
std::pair<IndexSet, IndexSet> orbit_partition(const ReflectionGroup& group);

struct CoverReport {
  double delta_found = 0.0;
  std::size_t samples = 0;
  Vec worst_z, worst_w;
  /// margins of the minimizing pair: E(S1, ·), E(S2, ·), E_reg(·)
  std::array<double, 3> margins{};
  /// Every regenerated pair lies in one of the three regions at delta_found.
  bool reverified = false;
  /// Sampled infimum on an independent seed.
  double fresh_delta = 0.0;
  /// Every fresh-seed pair is covered at delta_found / 2.
  bool fresh_covered_at_half = false;
};

/// Sampled infimum of max(margin_{E(S1)}, margin_{E(S2)}, reg_margin) over
/// B₂ × B₂. Throws InvalidArgument unless {S1, S2} is a partition of R_G into
/// nonempty G-invariant sets.
CoverReport find_covering_delta(const ReflectionGroup& group, const IndexSet& S1, const IndexSet& S2,
                                std::size_t samples, std::uint64_t seed);

struct BoundReport {
  double p = 2.0;
  double delta = 0.0;
  double fitted_constant = 0.0;  ///< sup over the first `sample_count` candidate pairs
  double doubled_constant = 0.0;  ///< sup over 2·sample_count candidates (a superset)
  double stability_ratio = 0.0;  ///< doubled_constant / fitted_constant
  std::size_t sample_count = 0;  ///< candidate pairs drawn
  std::size_t evaluated = 0;  ///< pairs inside the region and off the singular set (of the doubled run)
  std::size_t discarded = 0;  ///< pairs within 1e−6 of a hyperplane or of the singular set
  Vec worst_z, worst_w;
  /// Largest relative residual of K_G(z,w) = (1/|G|) Σ_g K_H(g.z,w) det g (0 when not checked).
  double averaging_error = 0.0;
  /// Largest relative residual of |J_H(g.z)| = |J_H(z)|.
  double j_invariance_error = 0.0;
  bool identities_hold = true;

  bool stable(double lo = 0.8, double hi = 1.25) const {
    return std::isfinite(fitted_constant) && stability_ratio >= lo && stability_ratio <= hi;
  }
};

inline constexpr double kAveragingTol = 1e-10;
inline constexpr double kJInvarianceTol = 1e-12;

/// sup over sampled (z,w) ∈ E(S,δ) of |K_{G,p}(z,w)| / ((1/|G|) Σ_g |K_{H,p}(g.z,w)|),
/// with H = G_S, plus the averaging and |J_H| invariance identities.
/// Throws InvalidArgument when R_H ≠ S.
BoundReport normal_subgroup_bound(const ReflectionGroup& group, const NormalSubgroup& subgroup, double p, double delta,
                                  std::size_t samples, std::uint64_t seed);
BoundReport normal_subgroup_bound(const ReflectionGroup& group, const IndexSet& S, double p, double delta,
                                  std::size_t samples, std::uint64_t seed);

/// sup of |K_{G,p}(z,w)| / ((1/|G|) Σ_g (|K_{G1,p}(g.z,w)| + |K_{G2,p}(g.z,w)| + 1)) over
/// sampled pairs of B₂ × B₂, with G_j = G_{S_j}. Throws InvalidArgument when
/// {S1, S2} is not an invariant partition or R_{G_j} ≠ S_j.
BoundReport main_estimate_check(const ReflectionGroup& group, const IndexSet& S1, const IndexSet& S2, double p,
                                std::size_t samples, std::uint64_t seed);
BoundReport main_estimate_check(const ReflectionGroup& group, double p, std::size_t samples, std::uint64_t seed);

/// sup of |M(z,w)| over sampled pairs of E_reg(δ) whose hyperplane distances are all ≥ 1e−3.
BoundReport division_quotient_bound(const KernelEvaluator& eval, double delta, std::size_t samples,
                                    std::uint64_t seed);

enum class SweepMethod { schur, grid_power };

struct SweepParams {
  std::size_t nodes = 2000;  ///< grid_power nodes
  std::uint64_t seed = 1;
  int power_iterations = 500;
  int schur_grid = 25;
  std::size_t test_points = 192;    ///< schur: sampled points for the sup
  std::size_t sphere_points = 192;  ///< schur: sphere samples per radial node
  double boundary_decades = 8.0;    ///< schur: half the test points have 1 − |z|² = 10^{−U·decades}
};

struct SweepRow {
  double p = 2.0;
  double indicator = 0.0;
  double best_s = 0.0;  ///< Schur exponent attaining the bound (schur only)
  std::size_t nodes = 0;  ///< test points (schur) or nodes (grid_power)
};

/// ∫_B |J_G(x)|^a |K_G(x,w)| |J_G(w)|^{−a} (1 − |w|²)^{−e} dV(w), 0 ≤ e < 1:
/// tanh-sinh quadrature in |w|² with an analytic endpoint tail, and on each sphere
/// importance sampling from a mixture of the uniform law and Poisson-Szegő laws
/// centred on the peaks of K(x, g·w).
double weighted_row_integral(const KernelEvaluator& eval, double a, const Vec& x, double e,
                             const SweepParams& params = {});

/// Norm indicator of the positive operator with kernel |K_{G,p}| on L^p(B_n).
/// schur: inf over s ∈ (0, min(1/p, 1/p′)) of c₁^{1/p′}c₂^{1/p}, where
/// c₁ = sup_x ∫|K_{G,p}(x,w)| h_s(w)^{p′} dw / h_s(x)^{p′}, c₂ is the transposed
/// quantity with exponent p, h_s = (1 − |z|²)^{−s} and the sup runs over sampled x.
/// grid_power: ℓ^p norm of A_ij = |K_{G,p}(z_i, z_j)|·|B_n|/N (i ≠ j) on Monte
/// Carlo nodes by Boyd's power iteration.
std::vector<SweepRow> norm_sweep(const KernelEvaluator& eval, const std::vector<double>& p_grid, SweepMethod method,
                                 const SweepParams& params = {});

}  // namespace bergcov
