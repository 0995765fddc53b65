#pragma once

// Bergman kernel of the unit ball, averaged kernels K_G and K_{G,p}, the
// quotient M = K_G / (J_G ⊗ conj J_G), pull-backs and the projection Π_G.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bergcov/invariants.hpp"

namespace bergcov {

enum class Normalization { probabilistic, unnormalized };

struct DomainSpec {
  int dimension = 2;
  Normalization normalization = Normalization::probabilistic;

  /// Lebesgue volume π^n/n! of the unit ball.
  double volume() const;
  /// n!/π^n, or 1 when unnormalized.
  double kernel_constant() const;
};

enum class KernelForm { w_side, z_side, double_sum };

class KernelEvaluator {
 public:
  /// Plain ball kernel, trivial group.
  explicit KernelEvaluator(DomainSpec domain = {});
  /// Averaged kernels for `group`; J_G defaults to jacobian_polynomial(group).
  KernelEvaluator(DomainSpec domain, std::shared_ptr<const ReflectionGroup> group, std::optional<double> p = {},
                  std::optional<LinearFormProduct> jg = {});

  const DomainSpec& domain() const { return domain_; }
  const ReflectionGroup& group() const { return *group_; }
  std::shared_ptr<const ReflectionGroup> group_ptr() const { return group_; }
  const LinearFormProduct& jacobian() const { return jg_; }
  std::optional<double> p() const { return p_; }
  /// Copy with a different exponent p.
  KernelEvaluator with_p(double p) const;

  /// K(z,w) = c_n (1 − ⟨z,w⟩)^{−(n+1)}. Throws SingularInput when |1 − ⟨z,w⟩| < 1e−14.
  cplx bergman_kernel(const Vec& z, const Vec& w) const;
  /// K_G(z,w) = (1/|G|) Σ_g K(z, g.w)·conj(det g).
  cplx averaged_kernel(const Vec& z, const Vec& w) const;
  /// z_side: (1/|G|) Σ_g K(g.z, w)·det g; double_sum: (1/|G|²) Σ_{g,h} det g·K(g.z, h.w)·conj(det h).
  cplx averaged_kernel_alt(const Vec& z, const Vec& w, KernelForm form) const;
  /// K_{G,p}(z,w) = |J_G(z)|^{2/p−1} K_G(z,w) |J_G(w)|^{1−2/p}.
  /// Throws SingularInput when a negative modulus exponent meets |J_G| < 1e−300.
  cplx weighted_kernel(const Vec& z, const Vec& w) const;
  /// log |K_{G,p}(z,w)| without forming the powers; −∞ when K_G vanishes.
  double log_abs_weighted(const Vec& z, const Vec& w) const;
  /// M(z,w) = K_G(z,w) / (J_G(z)·conj(J_G(w))). Throws SingularInput on a hyperplane.
  cplx division_quotient(const Vec& z, const Vec& w) const;

 private:
  void check_interior(const Vec& z) const;
  cplx raw_kernel(const Vec& z, const Vec& w) const;

  DomainSpec domain_;
  std::shared_ptr<const ReflectionGroup> group_;
  std::optional<double> p_;
  LinearFormProduct jg_;
  std::vector<Mat> matrices_;
  std::vector<cplx> dets_;
};

/// v(z) = J(π)(z)·u(π(z)), an element of the pulled-back space.
class TwistedFunction {
 public:
  TwistedFunction(std::shared_ptr<const OrbitMap> map, Polynomial downstairs);

  cplx operator()(const Vec& z) const;
  const OrbitMap& map() const { return *map_; }
  const Polynomial& downstairs() const { return u_; }

  /// max over g and sampled z of |det g·v(g.z) − v(z)| / |v(z)|.
  double twisted_invariance_error(int samples, std::uint64_t seed) const;

 private:
  std::shared_ptr<const OrbitMap> map_;
  Polynomial u_;
};

/// Involutive automorphism φ_a of the unit ball with φ_a(0) = a, φ_a(a) = 0.
/// `one_minus_a2` = 1 − |a|², passed separately to keep precision near the sphere.
Vec ball_automorphism(const Vec& a, double one_minus_a2, const Vec& z);

/// Poisson-Szegő kernel (1 − |a|²)^n / |1 − ⟨ζ,a⟩|^{2n}, a density for normalized
/// surface measure on the sphere. If η is uniform then φ_a(η) has this density.
double poisson_szego(const Vec& a, double one_minus_a2, const Vec& zeta);

using BallFunction = std::function<cplx(const Vec&)>;

/// (g* u)(z) = det(g)·u(g.z).
cplx pullback(const GroupElement& g, const BallFunction& u, const Vec& z);
/// (Π_G u)(z) = (1/|G|) Σ_g (g* u)(z).
cplx project_invariant(const ReflectionGroup& group, const BallFunction& u, const Vec& z);
/// Π_G u as a callable; `group` must outlive it.
BallFunction projected(const ReflectionGroup& group, BallFunction u);

// Explicit bounds for G = {id, r}, r(z₁, z₂) = (−z₁, z₂), in C².

/// Σ_{k≥0} (2k+2)(2k+3)/4^k, summed until the tail bound drops below 1e−14.
double appendix_series_constant();
/// (z, w) ∈ 𝒢 ⇔ |z₁ w̄₁| ≥ ½|1 − z₂ w̄₂|.
bool appendix_region_G(const Vec& z, const Vec& w);

struct AppendixReport {
  double p = 2.0;
  double series_constant = 0.0;
  std::size_t pairs = 0;  ///< pairs evaluated (each sampled pair and its swap)
  std::size_t pairs_in_region = 0;
  std::size_t discarded = 0;
  /// Smallest constants making each inequality hold on the sample:
  /// |K_{G,p}| ≤ C(p)(|K(z,w)| + |K(z,rw)|) on 𝒢,
  /// |K_{G,p}| ≤ C·|z₁|^{2/p}|w₁|^{2−2/p}/|1 − z₂w̄₂|⁴ off 𝒢,
  /// |K_{G,p}| ≤ C′|K(z,w)| off 𝒢.
  double fitted_region = 0.0;
  double fitted_series = 0.0;
  double fitted_ball = 0.0;
  /// Ceilings implied by the estimates in the chosen normalization.
  double ceiling_region = 0.0;
  double ceiling_series = 0.0;
  double ceiling_ball = 0.0;
  double max_ratio_in_region = 0.0;  ///< max of |z₁|/|w₁| and |w₁|/|z₁| over 𝒢
  bool holds_region = false;
  bool holds_series = false;
  bool holds_ball = false;
  bool holds() const { return holds_region && holds_series && holds_ball; }
};

/// Fits the three constants on explicit pairs; each pair is also used swapped.
AppendixReport appendix_bound_check(double p, const std::vector<std::pair<Vec, Vec>>& pairs);
/// As above on `samples` sampled pairs (uniform, boundary-biased and near-diagonal strata).
AppendixReport appendix_bound_check(double p, std::size_t samples, std::uint64_t seed);

}  // namespace bergcov
