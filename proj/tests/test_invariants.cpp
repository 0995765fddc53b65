#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bergcov/invariants.hpp"
#include "bergcov/random.hpp"

using namespace bergcov;

namespace {

constexpr double kPi = std::numbers::pi;

Polynomial z1() { return Polynomial::variable(2, 0); }
Polynomial z2() { return Polynomial::variable(2, 1); }

Vec random_ball_point(std::uint64_t key) {
  CounterRng rng(key);
  return sample_ball_uniform(rng, 2);
}

// Horner evaluation of Σ c_j t^j.
cplx eval_series(const std::vector<cplx>& c, cplx t) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::shared_ptr<const ReflectionGroup> shared(ReflectionGroup g) {
  return std::make_shared<const ReflectionGroup>(std::move(g));
}

}  // namespace

TEST_CASE("polynomial arithmetic and evaluation") {
  const Polynomial p = z1() * z1() + 3.0 * z1() * z2() - z2();
  const Vec z = make_vec({cplx(0.3, 0.1), cplx(-0.2, 0.4)});
  CHECK(std::abs(p(z) - (z(0) * z(0) + 3.0 * z(0) * z(1) - z(1))) < 1e-15);
  CHECK(p.degree() == 2);
  CHECK(Polynomial(2).degree() == -1);
  CHECK((p - p).is_zero());
  CHECK(p.derivative(0) == 2.0 * z1() + 3.0 * z2());
  CHECK(p.pow(3).approx_equal(p * p * p));
  CHECK(p.coefficient({1, 1}) == cplx(3.0));
}

TEST_CASE("exact ball moments") {
  CHECK(Polynomial::constant(2, 1.0).ball_norm_squared() == doctest::Approx(kPi * kPi / 2).epsilon(1e-14));
  CHECK(z1().ball_norm_squared() == doctest::Approx(kPi * kPi / 6).epsilon(1e-14));
  CHECK((z1() * z2()).ball_norm_squared() == doctest::Approx(kPi * kPi / 24).epsilon(1e-14));
  // monomials are orthogonal, so norms add
  CHECK((z1() + z2()).ball_norm_squared() == doctest::Approx(kPi * kPi / 3).epsilon(1e-14));
}

TEST_CASE("sup bound dominates sampled values") {
  const Polynomial p = z1().pow(3) - 2.0 * z1() * z2() + cplx(0.0, 1.0) * z2().pow(4);
  const double bound = p.ball_sup_bound();
  for (std::uint64_t i = 0; i < 500; ++i) CHECK(std::abs(p(random_ball_point(i))) <= bound);
}

TEST_CASE("line restriction matches direct evaluation") {
  const Polynomial p = z1().pow(4) - z2().pow(4) + cplx(0.5, 0.2) * z1() * z2().pow(2);
  const Vec base = make_vec({0.2, cplx(0.1, -0.3)});
  const Vec dir = make_vec({cplx(0.0, 1.0), 0.7});
  const auto c = restrict_to_line(p, base, dir);
  for (double t : {-0.5, 0.0, 0.3, 1.1}) CHECK(std::abs(eval_series(c, t) - p(base + t * dir)) < 1e-13);
}

TEST_CASE("symbolic Jacobian agrees with finite differences") {
  for (const OrbitMap& map : {orbit_map_pik(1), orbit_map_pik(2), orbit_map_gml2(4, 2), orbit_map_diagonal(3, 2)}) {
    CAPTURE(map.name());
    CHECK(jacobian_finite_difference_error(map, 200, 7) < 1e-7);
  }
}

TEST_CASE("J_G is the product of root forms with exponent m_Y - 1") {
  for (auto [m, ell] : std::vector<std::pair<int, int>>{{2, 2}, {4, 4}, {4, 2}, {3, 1}}) {
    const ReflectionGroup g = build_g_mln(m, ell, 2);
    const LinearFormProduct jg = jacobian_polynomial(g);
    CHECK(jg.degree() == static_cast<int>(g.reflections().size()));
    const Polynomial expanded = jg.expand();
    for (std::uint64_t i = 0; i < 50; ++i) {
      const Vec z = random_ball_point(100 + i);
      CHECK(std::abs(expanded(z) - jg.value(z)) < 1e-13);
      CHECK(jg.log_abs(z) == doctest::Approx(std::log(std::abs(jg.value(z)))).epsilon(1e-12));
    }
  }
  const LinearFormProduct jg = jacobian_polynomial(build_g_mln(2, 2, 2));
  CHECK(std::isinf(jg.log_abs(make_vec({0.3, 0.3}))));
}

TEST_CASE("orbit maps are invariant and their Jacobians skew") {
  for (int k = 0; k <= 3; ++k) {
    const OrbitMap map = orbit_map_pik(k);
    CHECK(map.degree() == static_cast<std::size_t>(2) << k);
    CHECK(jacobian_skew_error(map, 200, 3) < 1e-10);
  }
  CHECK(jacobian_skew_error(orbit_map_gml2(6, 2), 200, 3) < 1e-10);
}

TEST_CASE("|c_pi| for pi_k equals 2^k 2^(2^(k-1))") {
  // J(π_k) = N(z₁^N − z₂^N) with N = 2^k, and J_G = ∏_ζ (z₁ − ζz₂)/√2 = (z₁^N − z₂^N)/2^{N/2}.
  for (int k = 1; k <= 3; ++k) {
    const double n = std::pow(2.0, k);
    const OrbitMap map = orbit_map_pik(k);
    REQUIRE(map.jacobian_constant().has_value());
    CHECK(std::abs(*map.jacobian_constant()) == doctest::Approx(n * std::pow(2.0, n / 2)).epsilon(1e-12));
    const double err = jacobian_proportionality_error(map, jacobian_polynomial(map.group()), *map.jacobian_constant(),
                                                      1000, 99 + k);
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("c_pi for (z1^2 + z2^2, z1 z2) is 4") {
  // J(π) = 2(z₁² − z₂²), J_G = (z₁ − z₂)(z₁ + z₂)/2
  const OrbitMap map = orbit_map_gml2(2, 2);
  REQUIRE(map.jacobian_constant().has_value());
  CHECK(std::abs(*map.jacobian_constant()) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("c_pi for (z1^2, z2) is 2") {
  const OrbitMap map = orbit_map_diagonal(2, 1);
  REQUIRE(map.jacobian_constant().has_value());
  CHECK(std::abs(*map.jacobian_constant()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("a mismatched Jacobian gives no constant") {
  const OrbitMap map = orbit_map_pik(2);
  const LinearFormProduct wrong = jacobian_polynomial(build_g_mln(2, 2, 2));
  CHECK_THROWS_AS(fit_jacobian_constant(map, wrong), IdentityCheckFailed);
}

TEST_CASE("non-invariant components are rejected") {
  auto g = shared(build_g_mln(2, 2, 2));
  CHECK_THROWS_AS(OrbitMap({z1(), z2()}, g), InvalidArgument);
  CHECK_NOTHROW(OrbitMap({z1() * z1() + z2() * z2(), z1() * z2()}, g));
}

TEST_CASE("builtin dispatch and parameter validation") {
  CHECK(builtin_orbit_map("pik", {2}).group().order() == 8);
  CHECK(builtin_orbit_map("gml2", {4, 2}).group().order() == 16);
  CHECK(builtin_orbit_map("diagonal", {2, 1}).group().order() == 2);
  CHECK_THROWS_AS(builtin_orbit_map("nope", {}), InvalidArgument);
  CHECK_THROWS_AS(orbit_map_gml2(5, 2), InvalidArgument);
}

TEST_CASE("image oracles accept images of ball points") {
  for (const OrbitMap& map : {orbit_map_pik(1), orbit_map_gml2(4, 2), orbit_map_diagonal(2, 1)}) {
    REQUIRE(map.has_image_oracle());
    for (std::uint64_t i = 0; i < 200; ++i) CHECK(map.image_contains(map(random_ball_point(500 + i))));
    CHECK_FALSE(map.image_contains(make_vec({1.5, 0.0})));
  }
}

TEST_CASE("skew polynomials of G(2,2,2)") {
  const ReflectionGroup g = build_g_mln(2, 2, 2);
  const Polynomial a = z1().pow(4) - z2().pow(4);
  const Polynomial b = z1() * z2() * (z1() * z1() - z2() * z2());
  CHECK(skew_error(a, g, 100, 1) < 1e-12);
  CHECK(skew_error(b, g, 100, 1) < 1e-12);
  // −I has determinant 1 in dimension 2, so an odd polynomial cannot be skew
  CHECK(skew_error(z1() * (z1() * z1() - z2() * z2()), g, 100, 1) > 0.1);
}

TEST_CASE("skew polynomials are divisible by J_G") {
  const ReflectionGroup g = build_g_mln(2, 2, 2);
  const Polynomial a = z1().pow(4) - z2().pow(4);
  const DivisionReport report = skew_division_report(a, g);
  CHECK(report.divides);
  CHECK(report.max_cauchy_gap <= 1e-6);
  CHECK_FALSE(report.limits.empty());
  for (cplx l : report.limits) CHECK(std::isfinite(std::abs(l)));

  CHECK(skew_division_check(orbit_map_pik(2).jacobian_det(), build_g_mln(4, 4, 2)));
  CHECK(skew_division_check(orbit_map_gml2(4, 2).jacobian_det(), build_g_mln(4, 2, 2)));
  CHECK_THROWS_AS(skew_division_report(z1() * z1(), g), InvalidArgument);
}
