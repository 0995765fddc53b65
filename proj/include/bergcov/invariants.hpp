#pragma once

// Orbit maps, Jacobian polynomials and their proportionality.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bergcov/polynomial.hpp"
#include "bergcov/reflection_group.hpp"

namespace bergcov {

/// scale · ∏ ⟨z, root⟩^{exponent}.
struct LinearFormProduct {
  std::vector<std::pair<Vec, int>> factors;
  cplx scale = 1.0;
  int dimension = 2;

  cplx value(const Vec& z) const;
  /// log |value(z)|; −∞ on a vanishing factor.
  double log_abs(const Vec& z) const;
  int degree() const;
  Polynomial expand() const;
  std::vector<Vec> roots() const;
};

/// J_G = ∏_{Y ∈ R_G} ⟨z, e_Y⟩^{m_Y − 1} with canonical roots and unit scale.
LinearFormProduct jacobian_polynomial(const ReflectionGroup& group);
LinearFormProduct jacobian_polynomial(int dimension, std::span<const Hyperplane> hyperplanes);

enum class OrbitMapKind { gml2, pik, diagonal, custom };

/// A G-invariant polynomial map with its symbolic Jacobian determinant.
class OrbitMap {
 public:
  /// Throws InvalidArgument unless every component is G-invariant at 100
  /// random points (relative error ≤ 1e−10).
  OrbitMap(std::vector<Polynomial> components, std::shared_ptr<const ReflectionGroup> group,
           std::string name = "custom", OrbitMapKind kind = OrbitMapKind::custom);

  const std::vector<Polynomial>& components() const { return components_; }
  const ReflectionGroup& group() const { return *group_; }
  std::shared_ptr<const ReflectionGroup> group_ptr() const { return group_; }
  const Polynomial& jacobian_det() const { return jacobian_; }
  const std::string& name() const { return name_; }
  OrbitMapKind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(components_.size()); }
  /// Number of sheets of the covering, |G|.
  std::size_t degree() const { return group_->order(); }

  /// c_π with J(π) = c_π·J_G, when the ratio is constant (see fit_jacobian_constant).
  std::optional<cplx> jacobian_constant() const { return constant_; }

  Vec operator()(const Vec& z) const;
  cplx jacobian(const Vec& z) const { return jacobian_(z); }

  /// Membership oracle for π(B_n), available for the built-in families.
  bool has_image_oracle() const { return static_cast<bool>(image_contains_); }
  bool image_contains(const Vec& u) const;
  void set_image_oracle(std::function<bool(const Vec&)> oracle) { image_contains_ = std::move(oracle); }

 private:
  std::vector<Polynomial> components_;
  std::shared_ptr<const ReflectionGroup> group_;
  Polynomial jacobian_;
  std::string name_;
  OrbitMapKind kind_;
  std::optional<cplx> constant_;
  std::function<bool(const Vec&)> image_contains_;
};

/// (z₁^m + z₂^m, (z₁z₂)^{m/ℓ}) for G(m, ℓ, 2).
OrbitMap orbit_map_gml2(int m, int ell);
/// (z₁^{2^k} + z₂^{2^k}, z₁z₂) for G(2^k, 2^k, 2).
OrbitMap orbit_map_pik(int k);
/// (z₁^a, z₂^b) for the diagonal group generated by diag(e^{2πi/a}, 1) and diag(1, e^{2πi/b}).
OrbitMap orbit_map_diagonal(int a, int b);

/// Dispatch on "gml2" (params m, ℓ), "pik" (param k) or "diagonal" (params a, b).
OrbitMap builtin_orbit_map(const std::string& kind, const std::vector<int>& params);

/// The diagonal group attached to orbit_map_diagonal.
ReflectionGroup diagonal_group(int a, int b);

Polynomial symbolic_jacobian(const OrbitMap& map);

/// c_π = J(π)(z₀)/J_G(z₀) at a point off all hyperplanes, then asserted at
/// `samples` further points to relative accuracy 1e−9.
/// Throws IdentityCheckFailed when the ratio is not constant.
cplx fit_jacobian_constant(const OrbitMap& map, const LinearFormProduct& jg, int samples = 100,
                           std::uint64_t seed = 1);

/// max over sampled points of | |J(π)| − |c|·|J_G| | / (|c|·|J_G|).
double jacobian_proportionality_error(const OrbitMap& map, const LinearFormProduct& jg, cplx c,
                                      int samples, std::uint64_t seed);

/// max over g and sampled z of |J(π)(g.z)·det g − J(π)(z)| / |J(π)(z)|.
double jacobian_skew_error(const OrbitMap& map, int samples, std::uint64_t seed);

/// max over sampled z and variables of the relative gap between the symbolic
/// Jacobian and a central-difference Jacobian with the given step.
double jacobian_finite_difference_error(const OrbitMap& map, int samples, std::uint64_t seed,
                                        double step = 1e-5);

/// max over g and sampled z of |p(g.z) − det(g)⁻¹·p(z)|, relative to the sup bound of p.
double skew_error(const Polynomial& p, const ReflectionGroup& group, int samples, std::uint64_t seed);

struct DivisionReport {
  bool divides = false;
  /// Limit of p/J_G at one approach point per (hyperplane, sequence).
  std::vector<cplx> limits;
  double max_cauchy_gap = 0.0;
};

/// Checks that p/J_G stays finite across every reflecting hyperplane: along
/// three lines crossing each hyperplane, the quotient at t = 10⁻³ … 10⁻⁸ must
/// form a Cauchy sequence to 1e−6 relative. Throws InvalidArgument if p is not skew.
DivisionReport skew_division_report(const Polynomial& p, const ReflectionGroup& group, std::uint64_t seed = 1);
bool skew_division_check(const Polynomial& p, const ReflectionGroup& group, std::uint64_t seed = 1);

}  // namespace bergcov
