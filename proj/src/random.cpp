#include "bergcov/random.hpp"

#include <cmath>
#include <numbers>

namespace bergcov {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL));
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec sample_ball_uniform(CounterRng& rng, int n) {
  Vec z(n);
  for (;;) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double re = rng.uniform(-1.0, 1.0);
      const double im = rng.uniform(-1.0, 1.0);
      z(i) = cplx(re, im);
      r2 += re * re + im * im;
    }
    if (r2 < 1.0) return z;
  }
}

Vec sample_sphere(CounterRng& rng, int n) {
  Vec z(n);
  for (;;) {
    for (int i = 0; i < n; ++i) z(i) = cplx(rng.normal(), rng.normal());
    const double norm = z.norm();
    if (norm > 1e-12) return z / norm;
  }
}

Vec sample_ball_boundary_biased(CounterRng& rng, int n) {
  for (;;) {
    Vec z = sample_ball_uniform(rng, n);
    const double r = z.norm();
    if (r <= 0.0) continue;
    const double pushed = std::pow(r, 0.25);
    if (pushed < 1.0) return z * (pushed / r);
  }
}

Vec sample_ball_off_hyperplanes(CounterRng& rng, int n, const std::vector<Vec>& roots,
                                double min_distance) {
  for (;;) {
    Vec z = sample_ball_uniform(rng, n);
    bool ok = true;
    for (const Vec& e : roots) {
      if (std::abs(inner(z, e)) < min_distance) {
        ok = false;
        break;
      }
    }
    if (ok) return z;
  }
}

}  // namespace bergcov
