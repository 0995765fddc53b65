// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

#include "bergcov/cli.hpp"
#include "bergcov/estimates.hpp"
#include "bergcov/quadrature.hpp"
#include "bergcov/random.hpp"

using namespace bergcov;

namespace {

constexpr std::uint64_t kSeed = cli::kDefaultSeed;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Vec ball_point(std::uint64_t stream) {
  CounterRng rng(derive_key(kSeed, stream));
  return sample_ball_uniform(rng, 2);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

Outcome group_structure() {
  Outcome o;
  for (auto [m, ell] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {2, 1}, {3, 3}, {4, 4}, {4, 2}, {6, 6}, {8, 8}}) {
    const ReflectionGroup g = build_g_mln(m, ell, 2);
    const std::string tag = "G(" + std::to_string(m) + "," + std::to_string(ell) + ",2)";
    o.require(g.order() == static_cast<std::size_t>(2 * m * m / ell), tag + " order");
    if (m != ell) continue;
    const auto hs = reflecting_hyperplanes(g);
    o.require(hs.size() == static_cast<std::size_t>(m), tag + " hyperplane count");
    for (const Hyperplane& h : hs) o.require(h.multiplicity == 2, tag + " multiplicity");
    o.require(orbit_decomposition(g, hs).size() == (m % 2 == 0 ? 2u : 1u), tag + " orbit count");
  }
  return o;
}

Outcome reduction_tree_g882() {
  Outcome o;
  const ReductionTree t = reduction_tree(build_g_mln(8, 8, 2));
  o.require(t.depth() == 3, "depth 3");
  const auto leaves = t.leaves();
  o.require(leaves.size() == 8, "8 leaves");
  for (const ReflectionGroup* leaf : leaves) {
    o.require(leaf->order() == 2, "leaf order 2");
    const auto h = conjugacy_witness(*leaves.front(), *leaf);
    o.require(h.has_value(), "witness found");
    if (!h) continue;
    o.require((*h * h->adjoint() - Mat::Identity(2, 2)).norm() <= 1e-9, "witness unitary");
    for (const GroupElement& x : leaves.front()->elements())
      o.require(leaf->contains(*h * x.matrix() * h->adjoint()), "witness conjugates");
  }
  o.note("depth=" + std::to_string(t.depth()) + " leaves=" + std::to_string(leaves.size()));
  return o;
}

Outcome jacobian_proportionality() {
  Outcome o;
  for (int k = 1; k <= 3; ++k) {
    const OrbitMap map = orbit_map_pik(k);
    const auto c = map.jacobian_constant();
    o.require(c.has_value(), "constant fitted for k=" + std::to_string(k));
    if (!c) continue;
    const double err = jacobian_proportionality_error(map, jacobian_polynomial(map.group()), *c, 1000, kSeed + k);
    o.require(err <= 1e-10, "relative error for k=" + std::to_string(k));
    o.note("k=" + std::to_string(k) + " |c|=" + num(std::abs(*c)) + " err=" + num(err));
  }
  return o;
}

Outcome change_of_variable() {
  Outcome o;
  const CheckReport r = change_of_variable_check(orbit_map_diagonal(2, 1), 1000000, kSeed);
  const double target = kPi * kPi / 3.0;
  for (const CheckRow& row : r.rows) {
    if (row.quantity == "rhs_exact") o.require(std::abs(row.estimate.value.real() - target) <= 1e-12, "exact value");
    if (row.quantity == "rhs_one" || row.quantity == "lhs_one") {
      o.require(std::abs(row.estimate.value - target) <= 3.0 * row.estimate.std_error, row.quantity + " within 3 stderr");
      o.require(row.estimate.std_error < 6e-3, row.quantity + " stderr");
      o.note(row.quantity + "=" + num(row.estimate.value.real()) + "±" + num(row.estimate.std_error));
    }
  }
  o.require(r.passed(), "all identity rows");
  return o;
}

Outcome kernel_formulas() {
  Outcome o;
  const KernelEvaluator k(DomainSpec{}, std::make_shared<const ReflectionGroup>(build_g_mln(4, 4, 2)));
  double forms = 0.0, herm = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Vec z = ball_point(2 * i), w = ball_point(2 * i + 1);
    const cplx a = k.averaged_kernel(z, w);
    forms = std::max({forms, rel(a, k.averaged_kernel_alt(z, w, KernelForm::z_side)),
                      rel(a, k.averaged_kernel_alt(z, w, KernelForm::double_sum))});
    herm = std::max(herm, rel(a, std::conj(k.averaged_kernel(w, z))));
  }
  o.require(forms <= 1e-12, "formula agreement");
  o.require(herm <= 1e-12, "Hermitian symmetry");
  o.note("forms=" + num(forms) + " hermitian=" + num(herm));
  return o;
}

Outcome reproducing() {
  Outcome o;
  auto map = std::make_shared<const OrbitMap>(orbit_map_diagonal(2, 1));
  const KernelEvaluator eval(DomainSpec{}, map->group_ptr());
  const TwistedFunction v(map, Polynomial::constant(2, 1.0));
  const std::vector<Vec> points{make_vec({0.3, 0.1}), make_vec({-0.2, 0.4}), make_vec({cplx(0.1, 0.2), -0.3}),
                                make_vec({0.5, cplx(0.0, 0.2)}), make_vec({-0.35, cplx(-0.25, 0.1)})};
  const CheckReport r = reproducing_check(eval, v, points, 1000000, kSeed);
  o.require(r.rows.size() == points.size(), "one row per point");
  for (const CheckRow& row : r.rows) o.require(row.pass, row.quantity);
  if (r.rerun) o.note("rerun with 4x samples");
  double worst = 0.0;
  for (const CheckRow& row : r.rows) worst = std::max(worst, std::abs(row.estimate.value - *row.expected) / row.estimate.std_error);
  o.note("max deviation " + num(worst) + " stderr");
  return o;
}

Outcome appendix() {
  Outcome o;
  const double c = appendix_series_constant();
  o.require(std::abs(c - 416.0 / 27.0) <= 1e-12 * 416.0 / 27.0, "series constant");
  std::vector<AppendixReport> reports;
  for (double p : {4.0 / 3.0, 2.0, 4.0}) {
    reports.push_back(appendix_bound_check(p, 10000, kSeed));
    const AppendixReport& r = reports.back();
    o.require(r.holds(), "bounds at p=" + num(p));
    o.require(std::isfinite(r.fitted_region) && std::isfinite(r.fitted_series) && std::isfinite(r.fitted_ball),
              "finite constants at p=" + num(p));
  }
  auto close = [](double a, double b) { return std::abs(a - b) <= 0.1 * std::max(a, b); };
  o.require(close(reports[0].fitted_region, reports[2].fitted_region) &&
                close(reports[0].fitted_series, reports[2].fitted_series) &&
                close(reports[0].fitted_ball, reports[2].fitted_ball),
            "conjugate exponents agree");
  o.note("C(4/3)=" + num(reports[0].fitted_region) + " C(4)=" + num(reports[2].fitted_region) +
         " ball=" + num(reports[1].fitted_ball));
  return o;
}

Outcome covering() {
  Outcome o;
  for (int m : {2, 4}) {
    const ReflectionGroup g = build_g_mln(m, m, 2);
    const auto [s1, s2] = orbit_partition(g);
    const CoverReport a = find_covering_delta(g, s1, s2, 100000, kSeed);
    const CoverReport b = find_covering_delta(g, s1, s2, 200000, kSeed);
    const std::string tag = "G(" + std::to_string(m) + "," + std::to_string(m) + ",2)";
    o.require(a.delta_found > 0.0, tag + " delta > 0");
    o.require(std::abs(b.delta_found - a.delta_found) < 0.25 * a.delta_found, tag + " doubling stability");
    o.note(tag + " delta=" + num(a.delta_found) + " doubled=" + num(b.delta_found));
  }
  return o;
}

Outcome main_estimate() {
  Outcome o;
  const ReflectionGroup g = build_g_mln(4, 4, 2);
  for (double p : {4.0 / 3.0, 2.0, 4.0}) {
    const BoundReport r = main_estimate_check(g, p, 20000, kSeed);
    o.require(std::isfinite(r.doubled_constant), "finite at p=" + num(p));
    o.require(r.stable(), "stable at p=" + num(p));
    o.require(r.identities_hold, "identities at p=" + num(p));
    o.note("p=" + num(p) + " C=" + num(r.fitted_constant) + " ratio=" + num(r.stability_ratio));
  }
  return o;
}

Outcome norm_sweep_trend() {
  Outcome o;
  const KernelEvaluator eval(DomainSpec{}, std::make_shared<const ReflectionGroup>(single_reflection_group(2)));
  const std::vector<double> grid{1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 4.0};
  for (std::uint64_t seed : {kSeed, kSeed + 1, kSeed + 2}) {
    SweepParams params;
    params.seed = seed;
    const auto rows = norm_sweep(eval, grid, SweepMethod::schur, params);
    const std::string tag = " (seed " + std::to_string(seed) + ")";
    for (const SweepRow& r : rows)
      if (r.p >= 1.25) o.require(std::isfinite(r.indicator), "finite at p=" + num(r.p) + tag);
    o.require(rows[1].indicator > rows[2].indicator, "increase from 1.25 to 1.1" + tag);
    o.require(rows[0].indicator > rows[1].indicator, "increase from 1.1 to 1.05" + tag);
    o.require(std::abs(rows[3].indicator - rows[5].indicator) <= 1e-9 * rows[3].indicator, "p=1.5 and p=3 agree" + tag);
    if (seed != kSeed) continue;
    for (const SweepRow& r : rows) o.note("p=" + num(r.p) + ":" + num(r.indicator));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"group structure of G(m,l,2)", group_structure},
      {"reduction tree of G(8,8,2)", reduction_tree_g882},
      {"Jacobian proportionality for pi_k", jacobian_proportionality},
      {"change-of-variable volume for (z1^2, z2)", change_of_variable},
      {"averaged kernel formula equivalence", kernel_formulas},
      {"reproducing property", reproducing},
      {"explicit bounds and series constant", appendix},
      {"covering delta", covering},
      {"main estimate stability", main_estimate},
      {"norm sweep trend", norm_sweep_trend},
  };
  const std::vector<double> limits{1.0, 5.0, 0, 20.0, 0, 0, 0, 0, 0, 0};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[i] > 0.0) o.require(secs < limits[i], "runtime under " + num(limits[i]) + " s");
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
