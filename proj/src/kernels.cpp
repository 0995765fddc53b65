#include "bergcov/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kSingularGap = 1e-14;
constexpr double kJacobianFloor = 1e-300;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

double DomainSpec::volume() const { return std::pow(std::numbers::pi, dimension) / factorial(dimension); }

double DomainSpec::kernel_constant() const {
  return normalization == Normalization::probabilistic ? factorial(dimension) / std::pow(std::numbers::pi, dimension)
                                                       : 1.0;
}

KernelEvaluator::KernelEvaluator(DomainSpec domain)
    : KernelEvaluator(domain, std::make_shared<const ReflectionGroup>(
                                  close_group(std::vector<GroupElement>{GroupElement::identity(domain.dimension)},
                                              "trivial"))) {}

KernelEvaluator::KernelEvaluator(DomainSpec domain, std::shared_ptr<const ReflectionGroup> group,
                                 std::optional<double> p, std::optional<LinearFormProduct> jg)
    : domain_(domain), group_(std::move(group)), p_(p) {
  if (domain_.dimension < 1 || domain_.dimension > kMaxDim) throw InvalidArgument("ball dimension must be in [1, 4]");
  if (!group_) throw InvalidArgument("kernel evaluator needs a group");
  if (group_->dimension() != domain_.dimension) throw InvalidArgument("group and domain dimensions differ");
  if (p_ && !(*p_ > 1.0 && std::isfinite(*p_))) throw InvalidArgument("p must lie in (1, ∞)");
  jg_ = jg ? *jg : jacobian_polynomial(*group_);
  if (jg_.dimension != domain_.dimension) throw InvalidArgument("Jacobian polynomial has the wrong dimension");
  for (const GroupElement& g : group_->elements()) {
    matrices_.push_back(g.matrix());
    dets_.push_back(g.det());
  }
}

KernelEvaluator KernelEvaluator::with_p(double p) const { return KernelEvaluator(domain_, group_, p, jg_); }

void KernelEvaluator::check_interior(const Vec& z) const {
  if (z.size() != domain_.dimension) throw InvalidArgument("point has the wrong dimension");
  if (!(z.squaredNorm() < 1.0)) throw InvalidArgument("point is not inside the unit ball");
}

cplx KernelEvaluator::raw_kernel(const Vec& z, const Vec& w) const {
  const cplx gap = 1.0 - inner(z, w);
  if (std::abs(gap) < kSingularGap) throw SingularInput("numerically singular kernel pair");
  return domain_.kernel_constant() / ipow(gap, domain_.dimension + 1);
}

cplx KernelEvaluator::bergman_kernel(const Vec& z, const Vec& w) const {
  check_interior(z);
  check_interior(w);
  return raw_kernel(z, w);
}

cplx KernelEvaluator::averaged_kernel(const Vec& z, const Vec& w) const {
  check_interior(z);
  check_interior(w);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < matrices_.size(); ++i) sum += raw_kernel(z, matrices_[i] * w) * std::conj(dets_[i]);
  return sum / static_cast<double>(matrices_.size());
}

cplx KernelEvaluator::averaged_kernel_alt(const Vec& z, const Vec& w, KernelForm form) const {
  if (form == KernelForm::w_side) return averaged_kernel(z, w);
  check_interior(z);
  check_interior(w);
  const double order = static_cast<double>(matrices_.size());
  cplx sum = 0.0;
  if (form == KernelForm::z_side) {
    for (std::size_t i = 0; i < matrices_.size(); ++i) sum += raw_kernel(matrices_[i] * z, w) * dets_[i];
    return sum / order;
  }
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Vec gz = matrices_[i] * z;
    for (std::size_t j = 0; j < matrices_.size(); ++j)
      sum += dets_[i] * raw_kernel(gz, matrices_[j] * w) * std::conj(dets_[j]);
  }
  return sum / (order * order);
}

cplx KernelEvaluator::weighted_kernel(const Vec& z, const Vec& w) const {
  const cplx kg = averaged_kernel(z, w);
  const double a = p_ ? 2.0 / *p_ - 1.0 : 0.0;
  if (a == 0.0) return kg;
  const double jz = std::abs(jg_.value(z));
  const double jw = std::abs(jg_.value(w));
  if ((a < 0.0 && jz < kJacobianFloor) || (a > 0.0 && jw < kJacobianFloor))
    throw SingularInput("weighted kernel evaluated on a reflecting hyperplane");
  return std::pow(jz, a) * kg * std::pow(jw, -a);
}

double KernelEvaluator::log_abs_weighted(const Vec& z, const Vec& w) const {
  const double kg = std::abs(averaged_kernel(z, w));
  if (kg == 0.0) return -std::numeric_limits<double>::infinity();
  const double a = p_ ? 2.0 / *p_ - 1.0 : 0.0;
  if (a == 0.0) return std::log(kg);
  return a * jg_.log_abs(z) + std::log(kg) - a * jg_.log_abs(w);
}

cplx KernelEvaluator::division_quotient(const Vec& z, const Vec& w) const {
  const cplx jz = jg_.value(z);
  const cplx jw = jg_.value(w);
  if (std::abs(jz) < kJacobianFloor || std::abs(jw) < kJacobianFloor)
    throw SingularInput("division quotient evaluated on a reflecting hyperplane");
  return averaged_kernel(z, w) / (jz * std::conj(jw));
}

Vec ball_automorphism(const Vec& a, double one_minus_a2, const Vec& z) {
  const double a2 = a.squaredNorm();
  if (a2 == 0.0) return -z;
  const cplx za = inner(z, a);
  const Vec pz = (za / a2) * a;
  return (a - pz - std::sqrt(one_minus_a2) * (z - pz)) / (1.0 - za);
}

double poisson_szego(const Vec& a, double one_minus_a2, const Vec& zeta) {
  const double n = static_cast<double>(a.size());
  return std::pow(one_minus_a2 / std::norm(1.0 - inner(zeta, a)), n);
}

TwistedFunction::TwistedFunction(std::shared_ptr<const OrbitMap> map, Polynomial downstairs)
    : map_(std::move(map)), u_(std::move(downstairs)) {
  if (!map_) throw InvalidArgument("twisted function needs an orbit map");
  if (u_.dimension() != map_->dimension()) throw InvalidArgument("downstairs polynomial has the wrong dimension");
}

cplx TwistedFunction::operator()(const Vec& z) const { return map_->jacobian(z) * u_((*map_)(z)); }

double TwistedFunction::twisted_invariance_error(int samples, std::uint64_t seed) const {
  CounterRng rng(derive_key(seed, 0x90));
  std::vector<Vec> roots;
  for (const Hyperplane& h : reflecting_hyperplanes(map_->group())) roots.push_back(h.root);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec z = sample_ball_off_hyperplanes(rng, map_->dimension(), roots);
    const cplx vz = (*this)(z);
    for (const GroupElement& g : map_->group().elements()) {
      const cplx lhs = g.det() * (*this)(g.apply(z));
      const double scale = std::max(std::abs(vz), std::abs(lhs));
      if (scale > 0.0) worst = std::max(worst, std::abs(lhs - vz) / scale);
    }
  }
  return worst;
}

cplx pullback(const GroupElement& g, const BallFunction& u, const Vec& z) { return g.det() * u(g.apply(z)); }

cplx project_invariant(const ReflectionGroup& group, const BallFunction& u, const Vec& z) {
  cplx sum = 0.0;
  for (const GroupElement& g : group.elements()) sum += pullback(g, u, z);
  return sum / static_cast<double>(group.order());
}

BallFunction projected(const ReflectionGroup& group, BallFunction u) {
  return [&group, u = std::move(u)](const Vec& z) { return project_invariant(group, u, z); };
}

}  // namespace bergcov
