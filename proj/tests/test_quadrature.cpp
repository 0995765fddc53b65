#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "bergcov/quadrature.hpp"
#include "bergcov/random.hpp"

using namespace bergcov;

namespace {

constexpr double kPi = std::numbers::pi;

const CheckRow& row_named(const CheckReport& r, const std::string& q) {
  for (const CheckRow& row : r.rows)
    if (row.quantity == q) return row;
  FAIL("missing row " << q);
  return r.rows.front();
}

}  // namespace

TEST_CASE("counter rng is a pure function of key and counter") {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng skip(42, 5);
  CounterRng walk(42);
  for (int i = 0; i < 5; ++i) walk.next_u64();
  CHECK(skip.next_u64() == walk.next_u64());
  CHECK(derive_key(1, 0) != derive_key(1, 1));
  CHECK(derive_key(1, 0) != derive_key(2, 0));
}

TEST_CASE("uniform draws have the right moments") {
  CounterRng rng(7);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sum_sq / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("samplers are deterministic, nested and inside the ball") {
  for (SamplingStrategy s : {SamplingStrategy::uniform_rejection, SamplingStrategy::radial_stratified}) {
    const Sampler a(DomainSpec{}, 9, 1000, s);
    const Sampler b = a.with_count(5000);
    for (std::size_t i = 0; i < 1000; ++i) {
      CHECK(a.point(i) == b.point(i));
      CHECK(a.point(i).squaredNorm() < 1.0);
    }
    CHECK(Sampler(DomainSpec{}, 10, 10, s).point(3) != a.point(3));
  }
  CHECK_THROWS_AS(Sampler(DomainSpec{}, 1, 0), InvalidArgument);
}

TEST_CASE("radial distribution is uniform on the ball") {
  // P(|z| < r) = r⁴ in C²
  for (SamplingStrategy s : {SamplingStrategy::uniform_rejection, SamplingStrategy::radial_stratified}) {
    const Sampler sampler(DomainSpec{}, 3, 64000, s);
    for (double r : {0.3, 0.6, 0.9}) {
      std::size_t inside = 0;
      for (std::size_t i = 0; i < sampler.count(); ++i) inside += sampler.point(i).norm() < r;
      const double p = std::pow(r, 4.0);
      const double frac = static_cast<double>(inside) / sampler.count();
      CHECK(std::abs(frac - p) < 4.0 * std::sqrt(p * (1 - p) / sampler.count()) + 1e-12);
    }
  }
}

TEST_CASE("integrals of simple functions") {
  const Sampler sampler(DomainSpec{}, 2024, 200000);
  const MCEstimate one = integrate(sampler, [](const Vec&) { return cplx(1.0); });
  CHECK(one.value.real() == doctest::Approx(kPi * kPi / 2).epsilon(1e-14));
  CHECK(one.std_error == doctest::Approx(0.0));

  const MCEstimate z1sq = integrate(sampler, [](const Vec& z) { return cplx(std::norm(z(0))); });
  CHECK(std::abs(z1sq.value - kPi * kPi / 6) <= 3.0 * z1sq.std_error);
  CHECK(z1sq.std_error < 3e-3);

  const MCEstimate z1 = integrate(sampler, [](const Vec& z) { return z(0); });
  CHECK(std::abs(z1.value) <= 3.0 * z1.std_error);

  const Sampler strat(DomainSpec{}, 2024, 200000, SamplingStrategy::radial_stratified);
  const MCEstimate r2 = integrate(strat, [](const Vec& z) { return cplx(z.squaredNorm()); });
  CHECK(std::abs(r2.value - kPi * kPi / 3) <= 3.0 * r2.std_error);
}

TEST_CASE("weighted integrals") {
  auto map = std::make_shared<const OrbitMap>(orbit_map_diagonal(2, 1));
  const WeightedMeasure sigma = WeightedMeasure::for_p(map, 0.0);
  const Vec z = make_vec({0.4, 0.1});
  CHECK(sigma.density(z) == doctest::Approx(0.64).epsilon(1e-14));
  // ∫ |2z₁|² = 4π²/6
  const MCEstimate est = integrate(Sampler(DomainSpec{}, 5, 200000), [](const Vec&) { return cplx(1.0); }, sigma);
  CHECK(std::abs(est.value - 4.0 * kPi * kPi / 6.0) <= 3.0 * est.std_error);
}

TEST_CASE("non-finite integrands are dropped and counted") {
  const Sampler sampler(DomainSpec{}, 1, 10000);
  std::size_t calls = 0;
  const MCEstimate est = integrate(sampler, [&calls](const Vec&) {
    return ++calls % 1000 == 0 ? cplx(std::numeric_limits<double>::quiet_NaN()) : cplx(1.0);
  });
  CHECK(est.discarded == 10);
  CHECK(std::isfinite(est.value.real()));
  CHECK_THROWS_AS(integrate(sampler, [](const Vec& z) { return z(0).real() > 0 ? cplx(1.0 / 0.0) : cplx(1.0); }),
                  SingularInput);
}

TEST_CASE("change of variable for (z1^2, z2)") {
  const OrbitMap map = orbit_map_diagonal(2, 1);
  const CheckReport r = change_of_variable_check(map, 200000, 77);
  CHECK(r.passed());
  CHECK(row_named(r, "rhs_exact").estimate.value.real() == doctest::Approx(kPi * kPi / 3).epsilon(1e-14));
  CHECK(std::abs(row_named(r, "lhs_one").estimate.value - kPi * kPi / 3) <= row_named(r, "lhs_one").band);
}

TEST_CASE("change of variable for pi_1 and G(4,2,2)") {
  // J(π₁) = 2(z₁² − z₂²): (1/4)∫|J|² = 2∫|z₁|⁴ = 2·2π²/4! = π²/6
  const CheckReport r = change_of_variable_check(orbit_map_pik(1), 200000, 78);
  CHECK(r.passed());
  CHECK(row_named(r, "rhs_exact").estimate.value.real() == doctest::Approx(kPi * kPi / 6).epsilon(1e-14));
  CHECK(change_of_variable_check(orbit_map_gml2(4, 2), 100000, 79).passed());
}

TEST_CASE("change of variable without an image oracle") {
  auto g = std::make_shared<const ReflectionGroup>(build_g_mln(2, 2, 2));
  const Polynomial z1 = Polynomial::variable(2, 0), z2 = Polynomial::variable(2, 1);
  const OrbitMap map({z1 * z1 + z2 * z2, z1 * z2}, g);
  REQUIRE_FALSE(map.has_image_oracle());
  const CheckReport r = change_of_variable_check(map, 100000, 80);
  CHECK(r.passed());
  CHECK(row_named(r, "half_plus_complement").pass);
}

TEST_CASE("reproducing property for v = J(pi) on {id, diag(-1,1)}") {
  auto map = std::make_shared<const OrbitMap>(orbit_map_diagonal(2, 1));
  const KernelEvaluator eval(DomainSpec{}, map->group_ptr());
  const TwistedFunction v(map, Polynomial::constant(2, 1.0));
  const std::vector<Vec> points{make_vec({0.3, 0.1}), make_vec({cplx(-0.2, 0.3), 0.4})};
  const CheckReport r = reproducing_check(eval, v, points, 200000, 5);
  CHECK(r.passed());
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].expected->real() == doctest::Approx(0.6));
  CHECK_THROWS_AS(reproducing_check(eval.with_p(3.0), v, points, 100, 5), InvalidArgument);
}

TEST_CASE("reproducing property for a twisted function of G(4,4,2)") {
  auto map = std::make_shared<const OrbitMap>(orbit_map_pik(2));
  const KernelEvaluator eval(DomainSpec{}, map->group_ptr());
  const TwistedFunction v(map, Polynomial::variable(2, 1));
  CHECK(reproducing_check(eval, v, {make_vec({0.2, cplx(0.1, 0.3)})}, 200000, 6).passed());
}

TEST_CASE("mean value property") {
  CHECK(mean_value_check([](const Vec&) { return cplx(1.0); }, 10000, 1).passed());
  CHECK(mean_value_check([](const Vec& z) { return z(0) * z(1); }, 100000, 2).passed());
  const CheckReport r = mean_value_check([](const Vec& z) { return 3.0 + 5.0 * z(0) * z(0); }, 100000, 3);
  CHECK(r.passed());
  CHECK(r.rows.front().expected->real() == doctest::Approx(3.0));
  // |z₁|² is not holomorphic: its mean 1/3 differs from its value 0 at the center
  CHECK_FALSE(mean_value_check([](const Vec& z) { return cplx(std::norm(z(0))); }, 100000, 4).passed());
}
