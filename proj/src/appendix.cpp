#include <cmath>
#include <limits>

#include "bergcov/kernels.hpp"
#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kDiscard = 1e-6;

const KernelEvaluator& reflection_kernel() {
  static const KernelEvaluator eval(DomainSpec{}, std::make_shared<const ReflectionGroup>(single_reflection_group(2)));
  return eval;
}

Vec reflect(const Vec& w) { return make_vec({-w(0), w(1)}); }

// Keeps a perturbed point inside the ball.
Vec clamp_to_ball(Vec z) {
  const double r = z.norm();
  if (r >= 0.999999) z *= 0.999999 / r;
  return z;
}

}  // namespace

double appendix_series_constant() {
  double sum = 0.0;
  for (int k = 0;; ++k) {
    const double term = (2.0 * k + 2.0) * (2.0 * k + 3.0) / std::pow(4.0, k);
    sum += term;
    // Term ratios decrease toward 1/4, so the tail after k is at most next/(1 − ratio).
    const double next = (2.0 * k + 4.0) * (2.0 * k + 5.0) / std::pow(4.0, k + 1);
    const double ratio = (2.0 * k + 6.0) * (2.0 * k + 7.0) / ((2.0 * k + 4.0) * (2.0 * k + 5.0) * 4.0);
    if (ratio < 1.0 && next / (1.0 - ratio) < 1e-14) return sum;
  }
}

bool appendix_region_G(const Vec& z, const Vec& w) {
  return std::abs(z(0) * std::conj(w(0))) >= 0.5 * std::abs(1.0 - z(1) * std::conj(w(1)));
}

AppendixReport appendix_bound_check(double p, const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (!(p > 1.0 && std::isfinite(p))) throw InvalidArgument("p must lie in (1, ∞)");
  const KernelEvaluator& eval = reflection_kernel();
  const double a = 2.0 / p - 1.0;
  const double kappa = eval.domain().kernel_constant();

  AppendixReport report;
  report.p = p;
  report.series_constant = appendix_series_constant();
  report.ceiling_region = 0.5 * std::pow(4.0, std::abs(a));
  report.ceiling_series = 0.5 * kappa * report.series_constant;
  report.ceiling_ball = 52.0;

  double log_region = -std::numeric_limits<double>::infinity();
  double log_series = log_region;
  double log_ball = log_region;
  auto visit = [&](const Vec& z, const Vec& w) {
    if (z.size() != 2 || w.size() != 2) throw InvalidArgument("appendix pairs live in C²");
    const double gap_zw = std::abs(1.0 - inner(z, w));
    const double gap_zrw = std::abs(1.0 - inner(z, reflect(w)));
    if (gap_zw < kDiscard || gap_zrw < kDiscard) {
      ++report.discarded;
      return;
    }
    const cplx kg = eval.averaged_kernel(z, w);
    const double z1 = std::abs(z(0));
    const double w1 = std::abs(w(0));
    if (kg != cplx(0.0) && (z1 < kDiscard || w1 < kDiscard)) {
      ++report.discarded;
      return;
    }
    ++report.pairs;
    const bool in_region = appendix_region_G(z, w);
    if (in_region) ++report.pairs_in_region;
    if (kg == cplx(0.0)) return;
    const double log_kgp = a * std::log(z1) + std::log(std::abs(kg)) - a * std::log(w1);
    const double log_k = std::log(kappa) - 3.0 * std::log(gap_zw);
    if (in_region) {
      const double log_kr = std::log(kappa) - 3.0 * std::log(gap_zrw);
      const double hi = std::max(log_k, log_kr);
      const double log_sum = hi + std::log1p(std::exp(std::min(log_k, log_kr) - hi));
      log_region = std::max(log_region, log_kgp - log_sum);
      report.max_ratio_in_region = std::max(report.max_ratio_in_region, std::max(z1 / w1, w1 / z1));
    } else {
      const double log_bound = (2.0 / p) * std::log(z1) + (2.0 - 2.0 / p) * std::log(w1) -
                               4.0 * std::log(std::abs(1.0 - z(1) * std::conj(w(1))));
      log_series = std::max(log_series, log_kgp - log_bound);
      log_ball = std::max(log_ball, log_kgp - log_k);
    }
  };
  for (const auto& [z, w] : pairs) {
    visit(z, w);
    visit(w, z);
  }
  report.fitted_region = std::exp(log_region);
  report.fitted_series = std::exp(log_series);
  report.fitted_ball = std::exp(log_ball);
  const double slack = 1.0 + 1e-12;
  report.holds_region = std::isfinite(report.fitted_region) && report.fitted_region <= report.ceiling_region * slack &&
                        report.max_ratio_in_region <= 4.0 * slack;
  report.holds_series = std::isfinite(report.fitted_series) && report.fitted_series <= report.ceiling_series * slack;
  report.holds_ball = std::isfinite(report.fitted_ball) && report.fitted_ball <= report.ceiling_ball * slack;
  return report;
}

AppendixReport appendix_bound_check(double p, std::size_t samples, std::uint64_t seed) {
  std::vector<std::pair<Vec, Vec>> pairs;
  pairs.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(derive_key(seed, i));
    Vec z, w;
    switch (i % 4) {
      case 0:
        z = sample_ball_uniform(rng, 2);
        w = sample_ball_uniform(rng, 2);
        break;
      case 1:
        z = sample_ball_boundary_biased(rng, 2);
        w = sample_ball_boundary_biased(rng, 2);
        break;
      case 2:
        z = sample_ball_boundary_biased(rng, 2);
        w = clamp_to_ball(z + 0.05 * sample_ball_uniform(rng, 2));
        break;
      default:
        z = sample_ball_boundary_biased(rng, 2);
        w = clamp_to_ball(reflect(z) + 0.05 * sample_ball_uniform(rng, 2));
        break;
    }
    pairs.emplace_back(std::move(z), std::move(w));
  }
  return appendix_bound_check(p, pairs);
}

}  // namespace bergcov
