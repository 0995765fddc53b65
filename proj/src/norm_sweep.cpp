#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bergcov/estimates.hpp"
#include "bergcov/quadrature.hpp"
#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kNodeClearance = 1e-6;

double lp_norm(const Eigen::VectorXd& x, double p) { return std::pow(x.array().abs().pow(p).sum(), 1.0 / p); }

// ℓ^p → ℓ^p norm of a nonnegative matrix by Boyd's fixed-point iteration.
double boyd_norm(const Eigen::MatrixXd& a, double p, int iterations) {
  const double q = p / (p - 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(a.cols());
  x /= lp_norm(x, p);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd y = a * x;
    const double ny = lp_norm(y, p);
    if (ny == 0.0) return 0.0;
    const Eigen::VectorXd dual = (y / ny).array().pow(p - 1.0).matrix();
    x = (a.transpose() * dual).array().pow(q - 1.0).matrix();
    x /= lp_norm(x, p);
  }
  return lp_norm(a * x, p);
}

// Radial rule in y = −log(1 − |w|²) on [0, y_max]: Gauss-Legendre panels, with
// weights carrying the Jacobian e^{−y} dy = d|w|².
struct RadialRule {
  std::vector<double> y, t, weight;
  double y_max = 0.0;
};

constexpr double kRadialYMax = 32.0;
constexpr int kRadialPanels = 16;
constexpr int kPanelOrder = 6;

RadialRule radial_rule() {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(kPanelOrder, kPanelOrder);
  for (int k = 1; k < kPanelOrder; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  RadialRule rule;
  rule.y_max = kRadialYMax;
  const double width = kRadialYMax / kRadialPanels;
  for (int panel = 0; panel < kRadialPanels; ++panel) {
    for (int k = 0; k < kPanelOrder; ++k) {
      const double y = width * (panel + 0.5 * (eig.eigenvalues()(k) + 1.0));
      const double w = width * eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k);
      rule.y.push_back(y);
      rule.t.push_back(-std::expm1(-y));
      rule.weight.push_back(w * std::exp(-y));
    }
  }
  return rule;
}

double sphere_area(int n) {
  double f = 1.0;
  for (int i = 2; i < n; ++i) f *= i;
  return 2.0 * std::pow(std::numbers::pi, n) / f;
}

// Spherical averages of |J(x)|^{−a}·(weighted row integrand) at every radial node,
// for each requested exponent a.
class RowIntegrator {
 public:
  RowIntegrator(const KernelEvaluator& eval, const SweepParams& params)
      : eval_(eval), rule_(radial_rule()), components_(2 * eval.group().order() + 1), seed_(params.seed) {
    if (params.sphere_points == 0) throw InvalidArgument("norm sweep needs sphere points");
    per_node_ = (params.sphere_points + components_ - 1) / components_ * components_;
    for (const GroupElement& g : eval.group().elements()) inverses_.push_back(g.matrix().adjoint());
  }

  std::vector<std::vector<double>> profile(const Vec& x, double delta_x, const std::vector<double>& exponents) const {
    std::vector<std::vector<double>> out(exponents.size(), std::vector<double>(rule_.y.size(), 0.0));
    const int n = eval_.domain().dimension;
    const std::size_t peaks = inverses_.size();
    std::vector<Vec> centers(2 * peaks);
    std::vector<double> gaps(2 * peaks);
    std::vector<double> values, log_j;
    for (std::size_t k = 0; k < rule_.y.size(); ++k) {
      const double t = rule_.t[k];
      const double r = std::sqrt(t);
      // sharp laws sit on the peaks, wide ones at the same direction with gap √gap
      const double gap = std::exp(-rule_.y[k]) + t * delta_x;
      const double wide = std::sqrt(gap);
      const double shrink = gap < 1.0 ? std::sqrt((1.0 - wide) / (1.0 - gap)) : 0.0;
      for (std::size_t g = 0; g < peaks; ++g) {
        centers[g] = r * (inverses_[g] * x);
        centers[peaks + g] = shrink * centers[g];
        gaps[g] = gap;
        gaps[peaks + g] = wide;
      }
      values.clear();
      log_j.clear();
      CounterRng rng(derive_key(seed_ ^ 0x5bd1e995u, k));
      for (std::size_t j = 0; j < per_node_; ++j) {
        const std::size_t c = j % components_;
        const Vec eta = sample_sphere(rng, n);
        Vec zeta = c == 0 ? eta : ball_automorphism(centers[c - 1], gaps[c - 1], eta);
        zeta.normalize();
        double mix = 1.0;
        for (std::size_t i = 0; i < centers.size(); ++i) mix += poisson_szego(centers[i], gaps[i], zeta);
        mix /= static_cast<double>(components_);
        const Vec w = r * zeta;
        const double lj = eval_.jacobian().log_abs(w);
        if (!std::isfinite(lj)) continue;
        values.push_back(std::abs(eval_.averaged_kernel(x, w)) / mix);
        log_j.push_back(lj);
      }
      for (std::size_t i = 0; i < exponents.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) sum += values[j] * std::exp(-exponents[i] * log_j[j]);
        out[i][k] = sum / static_cast<double>(per_node_);
      }
    }
    return out;
  }

  // |S|·∫₀¹ (1 − t)^{−e} t^{n−1}/2 S(t) dt; beyond y_max, S is its mean over the last panel.
  double integrate(const std::vector<double>& spherical, double e) const {
    const int n = eval_.domain().dimension;
    double sum = 0.0;
    for (std::size_t k = 0; k < rule_.y.size(); ++k)
      sum += rule_.weight[k] * std::exp(e * rule_.y[k]) * std::pow(rule_.t[k], n - 1) * 0.5 * spherical[k];
    double settled = 0.0;
    for (std::size_t k = rule_.y.size() - kPanelOrder; k < rule_.y.size(); ++k) settled += spherical[k];
    settled /= kPanelOrder;
    sum += 0.5 * settled * std::exp(-(1.0 - e) * rule_.y_max) / (1.0 - e);
    return sphere_area(n) * sum;
  }

 private:
  const KernelEvaluator& eval_;
  RadialRule rule_;
  std::size_t components_;
  std::uint64_t seed_;
  std::size_t per_node_ = 0;
  std::vector<Mat> inverses_;
};

struct TestPoint {
  Vec x;
  double delta = 1.0;  // 1 − |x|²
  double log_j = 0.0;
};

std::vector<TestPoint> test_points(const KernelEvaluator& eval, const SweepParams& params) {
  const int n = eval.domain().dimension;
  const auto hyperplanes = reflecting_hyperplanes(eval.group());
  std::vector<TestPoint> points;
  for (std::uint64_t i = 0; points.size() < params.test_points; ++i) {
    if (i > 100 * params.test_points) throw SingularInput("too many sweep test points on reflecting hyperplanes");
    CounterRng rng(derive_key(params.seed ^ 0x27d4eb2fu, i));
    const Vec dir = sample_sphere(rng, n);
    double delta = 0.0;
    if (points.size() % 2 == 0) {
      delta = 1.0 - std::pow(rng.uniform(), 2.0 / n);
    } else {
      delta = std::pow(10.0, -params.boundary_decades * rng.uniform());
    }
    if (!(delta > 0.0)) continue;
    const Vec x = std::sqrt(1.0 - delta) * dir;
    bool clear = true;
    for (const Hyperplane& h : hyperplanes)
      if (std::abs(inner(x, h.root)) < kNodeClearance) clear = false;
    if (clear) points.push_back({x, delta, eval.jacobian().log_abs(x)});
  }
  return points;
}

// For each p: inf over the s grid of c₁^{1/q} c₂^{1/p}, c₁ at exponent +a with
// weight e = s·q, c₂ at exponent −a with e = s·p, sup over test points.
std::vector<SweepRow> schur_sweep(const KernelEvaluator& eval, const std::vector<double>& p_grid,
                                  const SweepParams& params) {
  if (params.test_points == 0) throw InvalidArgument("norm sweep needs test points");
  if (params.schur_grid < 1) throw InvalidArgument("norm sweep needs a nonempty s grid");
  const RowIntegrator integrator(eval, params);
  const std::vector<TestPoint> points = test_points(eval, params);
  std::vector<double> exponents;
  for (double p : p_grid) {
    exponents.push_back(2.0 / p - 1.0);
    exponents.push_back(1.0 - 2.0 / p);
  }
  std::vector<std::vector<std::vector<double>>> profiles;
  for (const TestPoint& pt : points) profiles.push_back(integrator.profile(pt.x, pt.delta, exponents));

  std::vector<SweepRow> rows;
  for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
    const double p = p_grid[ip];
    const double q = p / (p - 1.0);
    const double s_max = std::min(1.0 / p, 1.0 / q);
    auto sup = [&](std::size_t side, double e) {
      const double a = exponents[2 * ip + side];
      double best = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double value = std::exp(a * points[i].log_j + e * std::log(points[i].delta)) *
                             integrator.integrate(profiles[i][2 * ip + side], e);
        best = std::max(best, value);
      }
      return best;
    };
    SweepRow row;
    row.p = p;
    row.nodes = points.size();
    row.indicator = std::numeric_limits<double>::infinity();
    for (int k = 0; k < params.schur_grid; ++k) {
      const double s = s_max * (0.02 + 0.96 * k / std::max(params.schur_grid - 1, 1));
      const double bound = std::pow(sup(0, s * q), 1.0 / q) * std::pow(sup(1, s * p), 1.0 / p);
      if (bound < row.indicator) {
        row.indicator = bound;
        row.best_s = s;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

double weighted_row_integral(const KernelEvaluator& eval, double a, const Vec& x, double e, const SweepParams& params) {
  if (!(e >= 0.0 && e < 1.0)) throw InvalidArgument("row integral weight exponent must lie in [0, 1)");
  const double delta = 1.0 - x.squaredNorm();
  if (!(delta > 0.0)) throw InvalidArgument("point is not inside the unit ball");
  const RowIntegrator integrator(eval, params);
  const auto profile = integrator.profile(x, delta, {a});
  return std::exp(a * eval.jacobian().log_abs(x)) * integrator.integrate(profile.front(), e);
}

std::vector<SweepRow> norm_sweep(const KernelEvaluator& eval, const std::vector<double>& p_grid, SweepMethod method,
                                 const SweepParams& params) {
  if (p_grid.empty()) throw InvalidArgument("norm sweep needs a nonempty p grid");
  for (double p : p_grid)
    if (!(p > 1.0 && std::isfinite(p))) throw InvalidArgument("every p must lie in (1, ∞)");
  if (method == SweepMethod::schur) return schur_sweep(eval, p_grid, params);
  if (params.nodes < 2) throw InvalidArgument("norm sweep needs at least two nodes");
  const ReflectionGroup& group = eval.group();
  const auto hyperplanes = reflecting_hyperplanes(group);
  const Sampler sampler(eval.domain(), params.seed, params.nodes * 2);
  std::vector<Vec> nodes;
  for (std::size_t i = 0; nodes.size() < params.nodes; ++i) {
    if (i >= sampler.count()) throw SingularInput("too many sweep nodes on reflecting hyperplanes");
    const Vec z = sampler.point(i);
    bool clear = true;
    for (const Hyperplane& h : hyperplanes)
      if (std::abs(inner(z, h.root)) < kNodeClearance) clear = false;
    if (clear) nodes.push_back(z);
  }

  const std::size_t n = nodes.size();
  const double weight = eval.domain().volume() / static_cast<double>(n);
  Eigen::MatrixXd kernel(n, n);
  Eigen::VectorXd log_j(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_j(i) = eval.jacobian().log_abs(nodes[i]);
    for (std::size_t j = 0; j < n; ++j)
      kernel(i, j) = i == j ? 0.0 : std::abs(eval.averaged_kernel(nodes[i], nodes[j])) * weight;
  }

  std::vector<SweepRow> rows;
  for (double p : p_grid) {
    const double a = 2.0 / p - 1.0;
    const Eigen::VectorXd left = (a * log_j.array()).exp().matrix();
    const Eigen::VectorXd right = (-a * log_j.array()).exp().matrix();
    const Eigen::MatrixXd op = left.asDiagonal() * kernel * right.asDiagonal();
    SweepRow row;
    row.p = p;
    row.nodes = n;
    row.indicator = boyd_norm(op, p, params.power_iterations);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bergcov
