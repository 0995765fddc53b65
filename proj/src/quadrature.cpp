#include "bergcov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kBandSigmas = 3.0;
constexpr double kMaxDiscardFraction = 0.01;

struct Accumulator {
  std::size_t n = 0;
  double mean_re = 0.0, mean_im = 0.0, m2_re = 0.0, m2_im = 0.0;

  void add(cplx x) {
    ++n;
    const double dr = x.real() - mean_re;
    const double di = x.imag() - mean_im;
    mean_re += dr / static_cast<double>(n);
    mean_im += di / static_cast<double>(n);
    m2_re += dr * (x.real() - mean_re);
    m2_im += di * (x.imag() - mean_im);
  }

  MCEstimate scaled(double factor, std::size_t discarded) const {
    MCEstimate e;
    e.count = n;
    e.discarded = discarded;
    e.value = factor * cplx(mean_re, mean_im);
    if (n > 1) {
      const double var = (m2_re + m2_im) / static_cast<double>(n - 1);
      e.std_error = std::abs(factor) * std::sqrt(var / static_cast<double>(n));
    }
    return e;
  }
};

CheckRow compare(std::string quantity, const MCEstimate& est, cplx expected, double band, std::uint64_t seed) {
  CheckRow row{std::move(quantity), est, expected, band, std::abs(est.value - expected) <= band, seed};
  return row;
}

CheckRow against(std::string quantity, const MCEstimate& est, cplx expected, std::uint64_t seed) {
  return compare(std::move(quantity), est, expected, kBandSigmas * est.std_error, seed);
}

// Difference of two independent estimates, tested against zero.
CheckRow agreement(std::string quantity, const MCEstimate& a, const MCEstimate& b, std::uint64_t seed) {
  MCEstimate diff;
  diff.value = a.value - b.value;
  diff.std_error = std::hypot(a.std_error, b.std_error);
  diff.count = std::min(a.count, b.count);
  return against(std::move(quantity), diff, 0.0, seed);
}

CheckReport with_rerun(std::string name, std::size_t samples,
                       const std::function<std::vector<CheckRow>(std::size_t)>& run) {
  CheckReport report{std::move(name), run(samples), false};
  if (!report.passed()) {
    report.rows = run(4 * samples);
    report.rerun = true;
  }
  return report;
}

Vec sample_disc_product(CounterRng& rng, const std::vector<double>& radii) {
  Vec u(static_cast<Eigen::Index>(radii.size()));
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i] * std::sqrt(rng.uniform());
    u(static_cast<Eigen::Index>(i)) = std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
  }
  return u;
}

}  // namespace

Sampler::Sampler(DomainSpec domain, std::uint64_t seed, std::size_t count, SamplingStrategy strategy)
    : domain_(domain), seed_(seed), count_(count), strategy_(strategy) {
  if (count == 0) throw InvalidArgument("sampler needs at least one point");
}

Vec Sampler::point(std::size_t i) const {
  CounterRng rng(derive_key(seed_, i));
  const int n = domain_.dimension;
  if (strategy_ == SamplingStrategy::uniform_rejection) return sample_ball_uniform(rng, n);
  // Equal-volume radial shells: r^{2n} uniform within shell i mod kRadialStrata.
  const double u = (static_cast<double>(i % kRadialStrata) + rng.uniform()) / static_cast<double>(kRadialStrata);
  const double r = std::pow(u, 1.0 / (2.0 * n));
  return r * sample_sphere(rng, n);
}

double WeightedMeasure::density(const Vec& z) const {
  if (exponent == 0.0) return 1.0;
  if (!map) throw InvalidArgument("weighted measure needs an orbit map");
  return std::pow(std::abs(map->jacobian(z)), exponent);
}

MCEstimate integrate(const Sampler& sampler, const BallFunction& f, const std::optional<WeightedMeasure>& weight) {
  Accumulator acc;
  std::size_t discarded = 0;
  for (std::size_t i = 0; i < sampler.count(); ++i) {
    const Vec z = sampler.point(i);
    const double sigma = weight ? weight->density(z) : 1.0;
    if (!std::isfinite(sigma)) {
      ++discarded;
      continue;
    }
    const cplx value = f(z) * sigma;
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      ++discarded;
      continue;
    }
    acc.add(value);
  }
  if (static_cast<double>(discarded) > kMaxDiscardFraction * static_cast<double>(sampler.count()))
    throw SingularInput("integrand or weight singular on more than 1% of samples");
  // Dropped points count as zeros so the mean stays an unbiased volume average.
  for (std::size_t k = 0; k < discarded; ++k) acc.add(0.0);
  return acc.scaled(sampler.domain().volume(), discarded);
}

bool CheckReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

CheckReport change_of_variable_check(const OrbitMap& map, std::size_t samples, std::uint64_t seed) {
  const DomainSpec domain{map.dimension(), Normalization::probabilistic};
  const double d = static_cast<double>(map.degree());
  const double exact_total = map.jacobian_det().ball_norm_squared() / d;
  auto half = [](const Vec& u) { return u(0).real() > 0.0 ? 1.0 : 0.0; };

  auto rhs = [&](std::uint64_t s, std::size_t count, bool half_space) {
    const Sampler sampler(domain, s, count);
    return integrate(sampler, [&](const Vec& z) -> cplx {
      const double w = std::norm(map.jacobian(z)) / d;
      return half_space ? w * half(map(z)) : w;
    });
  };

  return with_rerun("change_of_variable", samples, [&](std::size_t count) {
    std::vector<CheckRow> rows;
    MCEstimate exact;
    exact.value = exact_total;
    exact.count = 0;
    rows.push_back(CheckRow{"rhs_exact", exact, std::nullopt, 0.0, true, seed});

    const MCEstimate rhs_one = rhs(seed, count, false);
    rows.push_back(against("rhs_one", rhs_one, exact_total, seed));
    const MCEstimate rhs_half = rhs(seed, count, true);

    if (map.has_image_oracle()) {
      std::vector<double> radii;
      for (const Polynomial& p : map.components()) radii.push_back(std::max(p.ball_sup_bound(), 1e-12));
      double box = 1.0;
      for (double r : radii) box *= std::numbers::pi * r * r;
      Accumulator one, halfacc;
      const std::uint64_t lhs_seed = derive_key(seed, 0xD0);
      for (std::size_t i = 0; i < count; ++i) {
        CounterRng rng(derive_key(lhs_seed, i));
        const Vec u = sample_disc_product(rng, radii);
        const double inside = map.image_contains(u) ? 1.0 : 0.0;
        one.add(inside);
        halfacc.add(inside * half(u));
      }
      const MCEstimate lhs_one = one.scaled(box, 0);
      const MCEstimate lhs_half = halfacc.scaled(box, 0);
      rows.push_back(against("lhs_one", lhs_one, exact_total, lhs_seed));
      rows.push_back(agreement("lhs_minus_rhs_one", lhs_one, rhs_one, seed));
      rows.push_back(CheckRow{"rhs_half", rhs_half, std::nullopt, 0.0, true, seed});
      rows.push_back(CheckRow{"lhs_half", lhs_half, std::nullopt, 0.0, true, lhs_seed});
      rows.push_back(agreement("lhs_minus_rhs_half", lhs_half, rhs_half, seed));
    } else {
      const std::uint64_t other = derive_key(seed, 0xD1);
      const MCEstimate rhs_half_other = rhs(other, count, true);
      const MCEstimate rhs_rest = [&] {
        const Sampler sampler(domain, other, count);
        return integrate(sampler, [&](const Vec& z) -> cplx {
          return std::norm(map.jacobian(z)) / d * (1.0 - half(map(z)));
        });
      }();
      rows.push_back(CheckRow{"rhs_half", rhs_half, std::nullopt, 0.0, true, seed});
      rows.push_back(agreement("rhs_half_seed_consistency", rhs_half, rhs_half_other, other));
      MCEstimate total;
      total.value = rhs_half.value + rhs_rest.value;
      total.std_error = std::hypot(rhs_half.std_error, rhs_rest.std_error);
      total.count = count;
      rows.push_back(against("half_plus_complement", total, exact_total, other));
    }
    return rows;
  });
}

CheckReport reproducing_check(const KernelEvaluator& eval, const BallFunction& v, const std::vector<Vec>& test_points,
                              std::size_t samples, std::uint64_t seed) {
  if (eval.p() && *eval.p() != 2.0) throw InvalidArgument("reproducing check runs at p = 2");
  return with_rerun("reproducing", samples, [&](std::size_t count) {
    std::vector<CheckRow> rows;
    for (std::size_t t = 0; t < test_points.size(); ++t) {
      const Vec& z = test_points[t];
      const std::uint64_t s = derive_key(seed, 0xE0 + t);
      const Sampler sampler(eval.domain(), s, count);
      const MCEstimate est = integrate(sampler, [&](const Vec& w) { return v(w) * eval.averaged_kernel(z, w); });
      rows.push_back(against("reproduce_point_" + std::to_string(t), est, v(z), s));
    }
    return rows;
  });
}

CheckReport reproducing_check(const KernelEvaluator& eval, const TwistedFunction& v,
                              const std::vector<Vec>& test_points, std::size_t samples, std::uint64_t seed) {
  return reproducing_check(eval, BallFunction([&v](const Vec& z) { return v(z); }), test_points, samples, seed);
}

CheckReport mean_value_check(const BallFunction& v, std::size_t samples, std::uint64_t seed, int dimension) {
  const DomainSpec domain{dimension, Normalization::probabilistic};
  const cplx at_origin = v(Vec::Zero(dimension));
  return with_rerun("mean_value", samples, [&](std::size_t count) {
    const Sampler sampler(domain, seed, count);
    MCEstimate est = integrate(sampler, v);
    const double vol = domain.volume();
    est.value /= vol;
    est.std_error /= vol;
    return std::vector<CheckRow>{against("ball_mean", est, at_origin, seed)};
  });
}

}  // namespace bergcov
