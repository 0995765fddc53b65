#include "bergcov/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kInvarianceTol = 1e-10;
constexpr double kConstantTol = 1e-9;
constexpr double kCauchyTol = 1e-6;

std::vector<Vec> hyperplane_roots(const ReflectionGroup& group) {
  std::vector<Vec> roots;
  for (const Hyperplane& h : reflecting_hyperplanes(group)) roots.push_back(h.root);
  return roots;
}

double relative_gap(cplx a, cplx b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Image of the ball under z ↦ (z₁^m + z₂^m, (z₁z₂)^{m/ℓ}): with a = z₁^m, b = z₂^m
// the pair {a, b} solves t² − u₁t + u₂^ℓ = 0, and |z|² = |a|^{2/m} + |b|^{2/m}.
std::function<bool(const Vec&)> symmetric_image_oracle(int m, int ell) {
  return [m, ell](const Vec& u) {
    const cplx s = u(0);
    const cplx prod = ipow(u(1), ell);
    const cplx disc = std::sqrt(s * s - 4.0 * prod);
    const cplx a = 0.5 * (s + disc);
    const cplx b = 0.5 * (s - disc);
    return std::pow(std::abs(a), 2.0 / m) + std::pow(std::abs(b), 2.0 / m) < 1.0;
  };
}

}  // namespace

cplx LinearFormProduct::value(const Vec& z) const {
  cplx v = scale;
  for (const auto& [root, k] : factors) v *= ipow(inner(z, root), k);
  return v;
}

double LinearFormProduct::log_abs(const Vec& z) const {
  double s = std::log(std::abs(scale));
  for (const auto& [root, k] : factors) {
    const double f = std::abs(inner(z, root));
    if (f == 0.0) return -std::numeric_limits<double>::infinity();
    s += k * std::log(f);
  }
  return s;
}

int LinearFormProduct::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.second;
  return d;
}

Polynomial LinearFormProduct::expand() const {
  Polynomial p = Polynomial::constant(dimension, scale);
  for (const auto& [root, k] : factors) {
    Polynomial form(dimension);
    for (int i = 0; i < dimension; ++i) {
      Exponent e(static_cast<std::size_t>(dimension), 0);
      e[static_cast<std::size_t>(i)] = 1;
      form.add_term(e, std::conj(root(i)));
    }
    p = p * form.pow(k);
  }
  return p;
}

std::vector<Vec> LinearFormProduct::roots() const {
  std::vector<Vec> out;
  for (const auto& f : factors) out.push_back(f.first);
  return out;
}

LinearFormProduct jacobian_polynomial(int dimension, std::span<const Hyperplane> hyperplanes) {
  LinearFormProduct j;
  j.dimension = dimension;
  for (const Hyperplane& h : hyperplanes) j.factors.emplace_back(h.root, h.multiplicity - 1);
  return j;
}

LinearFormProduct jacobian_polynomial(const ReflectionGroup& group) {
  const auto hyperplanes = reflecting_hyperplanes(group);
  return jacobian_polynomial(group.dimension(), hyperplanes);
}

OrbitMap::OrbitMap(std::vector<Polynomial> components, std::shared_ptr<const ReflectionGroup> group,
                   std::string name, OrbitMapKind kind)
    : components_(std::move(components)), group_(std::move(group)), name_(std::move(name)), kind_(kind) {
  if (!group_) throw InvalidArgument("orbit map needs a group");
  const int n = group_->dimension();
  if (static_cast<int>(components_.size()) != n) throw InvalidArgument("orbit map needs one component per variable");
  jacobian_ = jacobian_determinant(components_);

  CounterRng rng(derive_key(0x0B17, 0));
  for (int s = 0; s < 100; ++s) {
    const Vec z = sample_ball_uniform(rng, n);
    for (const Polynomial& p : components_) {
      const cplx pz = p(z);
      const double scale = std::max(std::abs(pz), 1e-300 + 1e-12 * p.ball_sup_bound());
      for (const GroupElement& g : group_->elements()) {
        if (std::abs(p(g.apply(z)) - pz) > kInvarianceTol * scale)
          throw InvalidArgument("orbit map component is not invariant under " + group_->name());
      }
    }
  }
  if (jacobian_.is_zero()) return;
  try {
    constant_ = fit_jacobian_constant(*this, jacobian_polynomial(*group_), 100, 0x0B17);
  } catch (const IdentityCheckFailed&) {
    constant_.reset();
  }
}

Vec OrbitMap::operator()(const Vec& z) const {
  Vec u(dimension());
  for (int i = 0; i < dimension(); ++i) u(i) = components_[static_cast<std::size_t>(i)](z);
  return u;
}

bool OrbitMap::image_contains(const Vec& u) const {
  if (!image_contains_) throw InvalidArgument("no image oracle for orbit map " + name_);
  return image_contains_(u);
}

ReflectionGroup diagonal_group(int a, int b) {
  if (a < 1 || b < 1) throw InvalidArgument("diagonal exponents must be positive");
  std::vector<GroupElement> gens;
  Mat g1 = Mat::Identity(2, 2);
  g1(0, 0) = std::polar(1.0, 2.0 * std::numbers::pi / a);
  Mat g2 = Mat::Identity(2, 2);
  g2(1, 1) = std::polar(1.0, 2.0 * std::numbers::pi / b);
  if (a == 2) g1(0, 0) = -1.0;
  if (b == 2) g2(1, 1) = -1.0;
  gens.emplace_back(g1);
  gens.emplace_back(g2);
  return close_group(gens, "diag(" + std::to_string(a) + "," + std::to_string(b) + ")");
}

OrbitMap orbit_map_gml2(int m, int ell) {
  if (m < 1 || ell < 1 || m % ell != 0) throw InvalidArgument("gml2 needs m ≥ 1 and ℓ | m");
  auto group = std::make_shared<const ReflectionGroup>(build_g_mln(m, ell, 2));
  Polynomial p1 = Polynomial::monomial({m, 0}) + Polynomial::monomial({0, m});
  Polynomial p2 = Polynomial::monomial({m / ell, m / ell});
  OrbitMap map({p1, p2}, group, "gml2(" + std::to_string(m) + "," + std::to_string(ell) + ")", OrbitMapKind::gml2);
  map.set_image_oracle(symmetric_image_oracle(m, ell));
  return map;
}

OrbitMap orbit_map_pik(int k) {
  if (k < 0 || k > 6) throw InvalidArgument("pik needs 0 ≤ k ≤ 6");
  const int d = 1 << k;
  auto group = std::make_shared<const ReflectionGroup>(build_g_mln(d, d, 2));
  Polynomial p1 = Polynomial::monomial({d, 0}) + Polynomial::monomial({0, d});
  Polynomial p2 = Polynomial::monomial({1, 1});
  OrbitMap map({p1, p2}, group, "pik(" + std::to_string(k) + ")", OrbitMapKind::pik);
  map.set_image_oracle(symmetric_image_oracle(d, d));
  return map;
}

OrbitMap orbit_map_diagonal(int a, int b) {
  auto group = std::make_shared<const ReflectionGroup>(diagonal_group(a, b));
  OrbitMap map({Polynomial::monomial({a, 0}), Polynomial::monomial({0, b})}, group,
               "diagonal(" + std::to_string(a) + "," + std::to_string(b) + ")", OrbitMapKind::diagonal);
  map.set_image_oracle([a, b](const Vec& u) {
    return std::pow(std::abs(u(0)), 2.0 / a) + std::pow(std::abs(u(1)), 2.0 / b) < 1.0;
  });
  return map;
}

OrbitMap builtin_orbit_map(const std::string& kind, const std::vector<int>& params) {
  if (kind == "gml2") {
    if (params.size() != 2) throw InvalidArgument("gml2 takes (m, ℓ)");
    return orbit_map_gml2(params[0], params[1]);
  }
  if (kind == "pik") {
    if (params.size() != 1) throw InvalidArgument("pik takes (k)");
    return orbit_map_pik(params[0]);
  }
  if (kind == "diagonal") {
    if (params.size() != 2) throw InvalidArgument("diagonal takes (a, b)");
    return orbit_map_diagonal(params[0], params[1]);
  }
  throw InvalidArgument("unknown orbit map kind '" + kind + "'");
}

Polynomial symbolic_jacobian(const OrbitMap& map) { return jacobian_determinant(map.components()); }

cplx fit_jacobian_constant(const OrbitMap& map, const LinearFormProduct& jg, int samples, std::uint64_t seed) {
  if (jg.dimension != map.dimension()) throw InvalidArgument("Jacobian polynomial has the wrong dimension");
  const std::vector<Vec> roots = jg.roots();
  CounterRng rng(derive_key(seed, 0x7C));
  const Vec z0 = sample_ball_off_hyperplanes(rng, map.dimension(), roots);
  const cplx c = map.jacobian(z0) / jg.value(z0);
  if (!std::isfinite(std::abs(c)) || std::abs(c) == 0.0)
    throw IdentityCheckFailed("Jacobian ratio is zero or infinite at the base point");
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_off_hyperplanes(rng, map.dimension(), roots);
    const cplx r = map.jacobian(z) / jg.value(z);
    if (std::abs(r - c) > kConstantTol * std::abs(c))
      throw IdentityCheckFailed("J(π)/J_G is not constant for " + map.name());
  }
  return c;
}

double jacobian_proportionality_error(const OrbitMap& map, const LinearFormProduct& jg, cplx c, int samples,
                                      std::uint64_t seed) {
  const std::vector<Vec> roots = jg.roots();
  CounterRng rng(derive_key(seed, 0x7D));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_off_hyperplanes(rng, map.dimension(), roots);
    const double expected = std::abs(c) * std::abs(jg.value(z));
    worst = std::max(worst, std::abs(std::abs(map.jacobian(z)) - expected) / expected);
  }
  return worst;
}

double jacobian_skew_error(const OrbitMap& map, int samples, std::uint64_t seed) {
  const std::vector<Vec> roots = hyperplane_roots(map.group());
  CounterRng rng(derive_key(seed, 0x7E));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_off_hyperplanes(rng, map.dimension(), roots);
    const cplx jz = map.jacobian(z);
    for (const GroupElement& g : map.group().elements())
      worst = std::max(worst, relative_gap(map.jacobian(g.apply(z)) * g.det(), jz));
  }
  return worst;
}

double jacobian_finite_difference_error(const OrbitMap& map, int samples, std::uint64_t seed, double step) {
  const int n = map.dimension();
  const std::vector<Vec> roots = hyperplane_roots(map.group());
  CounterRng rng(derive_key(seed, 0x7F));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_off_hyperplanes(rng, n, roots);
    Mat jac(n, n);
    for (int j = 0; j < n; ++j) {
      Vec plus = z, minus = z;
      plus(j) += step;
      minus(j) -= step;
      const Vec dp = map(plus) - map(minus);
      for (int i = 0; i < n; ++i) jac(i, j) = dp(i) / (2.0 * step);
    }
    worst = std::max(worst, relative_gap(jac.determinant(), map.jacobian(z)));
  }
  return worst;
}

double skew_error(const Polynomial& p, const ReflectionGroup& group, int samples, std::uint64_t seed) {
  const double scale = std::max(p.ball_sup_bound(), 1e-300);
  CounterRng rng(derive_key(seed, 0x80));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_uniform(rng, group.dimension());
    const cplx pz = p(z);
    for (const GroupElement& g : group.elements())
      worst = std::max(worst, std::abs(p(g.apply(z)) - std::conj(g.det()) * pz) / scale);
  }
  return worst;
}

DivisionReport skew_division_report(const Polynomial& p, const ReflectionGroup& group, std::uint64_t seed) {
  if (p.dimension() != group.dimension()) throw InvalidArgument("polynomial and group dimensions differ");
  if (skew_error(p, group, 100, seed) > kInvarianceTol) throw InvalidArgument("polynomial is not skew for " + group.name());

  const int n = group.dimension();
  const auto hyperplanes = reflecting_hyperplanes(group);
  DivisionReport report;
  report.divides = true;
  if (p.is_zero()) return report;
  CounterRng rng(derive_key(seed, 0x81));
  for (std::size_t y = 0; y < hyperplanes.size(); ++y) {
    const Vec& e = hyperplanes[y].root;
    const int order = hyperplanes[y].multiplicity - 1;
    for (int seq = 0; seq < 3; ++seq) {
      // Base point on Y away from the other hyperplanes, transverse direction with a random tilt.
      Vec base;
      for (;;) {
        Vec x = sample_ball_uniform(rng, n);
        x -= inner(x, e) * e;
        if (x.norm() < 1e-3) continue;
        x *= 0.5 / x.norm();
        bool clear = true;
        for (std::size_t o = 0; o < hyperplanes.size(); ++o)
          if (o != y && std::abs(inner(x, hyperplanes[o].root)) < 1e-2) clear = false;
        if (clear) {
          base = x;
          break;
        }
      }
      const Vec dir = e * std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi)) + 0.3 * sample_sphere(rng, n);
      const cplx transverse = inner(dir, e);
      const std::vector<cplx> coeffs = restrict_to_line(p, base, dir);
      double total = 0.0;
      for (const cplx& c : coeffs) total += std::abs(c);
      // p/J_G is bounded near Y iff the first m_Y − 1 coefficients vanish.
      for (int j = 0; j < order && j < static_cast<int>(coeffs.size()); ++j) {
        if (std::abs(coeffs[static_cast<std::size_t>(j)]) > kConstantTol * total) report.divides = false;
      }
      if (!report.divides) return report;

      auto quotient = [&](double t) {
        cplx num = 0.0;
        for (std::size_t j = static_cast<std::size_t>(order); j < coeffs.size(); ++j)
          num += coeffs[j] * std::pow(t, static_cast<double>(j) - order);
        cplx den = ipow(transverse, order);
        const Vec z = base + t * dir;
        for (std::size_t o = 0; o < hyperplanes.size(); ++o)
          if (o != y) den *= ipow(inner(z, hyperplanes[o].root), hyperplanes[o].multiplicity - 1);
        return num / den;
      };
      cplx previous = quotient(1e-3);
      double gap = 0.0;
      for (int k = 4; k <= 8; ++k) {
        const cplx q = quotient(std::pow(10.0, -k));
        gap = relative_gap(q, previous);
        previous = q;
      }
      report.max_cauchy_gap = std::max(report.max_cauchy_gap, gap);
      report.limits.push_back(previous);
      if (gap > kCauchyTol || !std::isfinite(std::abs(previous))) report.divides = false;
    }
  }
  return report;
}

bool skew_division_check(const Polynomial& p, const ReflectionGroup& group, std::uint64_t seed) {
  return skew_division_report(p, group, seed).divides;
}

}  // namespace bergcov
