#pragma once

// Seeded Monte Carlo integration on the unit ball and integral-identity checks.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bergcov/kernels.hpp"

namespace bergcov {

enum class SamplingStrategy { uniform_rejection, radial_stratified };

/// Deterministic stream of uniform ball points: point(i) depends only on
/// (seed, strategy, i), so any block of indices can be drawn independently.
class Sampler {
 public:
  Sampler(DomainSpec domain, std::uint64_t seed, std::size_t count,
          SamplingStrategy strategy = SamplingStrategy::uniform_rejection);

  Vec point(std::size_t i) const;
  const DomainSpec& domain() const { return domain_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t count() const { return count_; }
  SamplingStrategy strategy() const { return strategy_; }
  Sampler with_count(std::size_t count) const { return Sampler(domain_, seed_, count, strategy_); }

  static constexpr std::size_t kRadialStrata = 16;

 private:
  DomainSpec domain_;
  std::uint64_t seed_;
  std::size_t count_;
  SamplingStrategy strategy_;
};

struct MCEstimate {
  cplx value = 0.0;
  /// Standard errors of the real and imaginary parts combined in quadrature.
  double std_error = 0.0;
  std::size_t count = 0;
  std::size_t discarded = 0;
};

/// Density σ(z) = |J(π)(z)|^{exponent}; exponent = 2 − p.
struct WeightedMeasure {
  std::shared_ptr<const OrbitMap> map;
  double exponent = 0.0;

  static WeightedMeasure for_p(std::shared_ptr<const OrbitMap> map, double p) { return {std::move(map), 2.0 - p}; }
  double density(const Vec& z) const;
};

/// ∫_{B_n} f·σ dV as ball volume × sample mean. Non-finite integrand or weight
/// values are dropped and counted; more than 1% dropped throws SingularInput.
MCEstimate integrate(const Sampler& sampler, const BallFunction& f,
                     const std::optional<WeightedMeasure>& weight = std::nullopt);

struct CheckRow {
  std::string quantity;
  MCEstimate estimate;
  std::optional<cplx> expected;
  /// Half-width of the acceptance band (3 standard errors, combined when two estimates meet).
  double band = 0.0;
  bool pass = true;
  std::uint64_t seed = 0;
};

struct CheckReport {
  std::string name;
  std::vector<CheckRow> rows;
  bool rerun = false;  ///< a failure triggered one rerun with 4× samples
  bool passed() const;
};

/// ∫_D g = (1/d)∫_E g∘π |J(π)|² for g ≡ 1 and g = 1{Re u₁ > 0}. With an image
/// oracle the left side is sampled on a polydisc around π(B_n); otherwise two
/// independent seeds are compared for consistency. The exact value of
/// (1/d)∫|J(π)|² from ball moments is included as a row.
CheckReport change_of_variable_check(const OrbitMap& map, std::size_t samples, std::uint64_t seed);

/// At each z: |∫ v(w) K_G(z,w) dw − v(z)| ≤ 3·stderr.
CheckReport reproducing_check(const KernelEvaluator& eval, const BallFunction& v, const std::vector<Vec>& test_points,
                              std::size_t samples, std::uint64_t seed);
CheckReport reproducing_check(const KernelEvaluator& eval, const TwistedFunction& v,
                              const std::vector<Vec>& test_points, std::size_t samples, std::uint64_t seed);

/// |mean over B_n of v − v(0)| ≤ 3·stderr.
CheckReport mean_value_check(const BallFunction& v, std::size_t samples, std::uint64_t seed, int dimension = 2);

}  // namespace bergcov
