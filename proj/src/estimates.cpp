#include "bergcov/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bergcov/random.hpp"

namespace bergcov {

namespace {

constexpr double kDiscard = 1e-6;
constexpr double kIdentityClearance = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec clamp_to_ball(Vec z) {
  const double r = z.norm();
  constexpr double kMax = 1.0 - 1e-9;
  if (r >= kMax) z *= kMax / r;
  return z;
}

// Candidate pair i of a nested stream, from one of four strata: uniform,
// boundary-biased, near an orbit point (w ≈ g.z), and near a hyperplane and an orbit point.
std::pair<Vec, Vec> sample_pair(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes,
                                std::uint64_t seed, std::size_t i) {
  CounterRng rng(derive_key(seed, i));
  const int n = group.dimension();
  switch (i % 4) {
    case 0: {
      Vec z = sample_ball_uniform(rng, n);
      return {z, sample_ball_uniform(rng, n)};
    }
    case 1: {
      Vec z = sample_ball_boundary_biased(rng, n);
      return {z, sample_ball_boundary_biased(rng, n)};
    }
    default: {
      Vec z = sample_ball_boundary_biased(rng, n);
      if (i % 4 == 3 && !hyperplanes.empty()) {
        const Vec& e = hyperplanes[rng.index(hyperplanes.size())].root;
        const double keep = std::pow(10.0, -3.0 * rng.uniform());
        z -= (1.0 - keep) * inner(z, e) * e;
      }
      const GroupElement& g = group.element(rng.index(group.order()));
      const double scale = 0.1 * std::pow(10.0, -3.0 * rng.uniform());
      return {z, clamp_to_ball(g.apply(z) + scale * sample_ball_uniform(rng, n))};
    }
  }
}

double log_sum_exp(const std::vector<double>& xs) {
  double hi = -kInf;
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - hi);
  return hi + std::log(s);
}

double min_hyperplane_distance(std::span<const Hyperplane> hyperplanes, const Vec& z) {
  double d = kInf;
  for (const Hyperplane& h : hyperplanes) d = std::min(d, std::abs(inner(z, h.root)));
  return d;
}

bool near_singular_set(const ReflectionGroup& group, const Vec& z, const Vec& w) {
  for (const GroupElement& g : group.elements())
    if (std::abs(1.0 - inner(g.apply(z), w)) < kDiscard) return true;
  return false;
}

void validate_partition(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes, const IndexSet& S1,
                        const IndexSet& S2) {
  if (S1.empty() || S2.empty())
    throw InvalidArgument("covering partition needs two nonempty G-invariant sets; " + group.name() +
                          " has no nontrivial invariant partition of its hyperplanes");
  std::set<std::size_t> seen;
  for (const IndexSet* s : {&S1, &S2}) {
    for (std::size_t y : *s) {
      if (y >= hyperplanes.size()) throw InvalidArgument("hyperplane index out of range");
      if (!seen.insert(y).second) throw InvalidArgument("partition sets overlap");
    }
    if (!is_invariant_set(group, hyperplanes, *s)) throw InvalidArgument("partition set is not G-invariant");
  }
  if (seen.size() != hyperplanes.size()) throw InvalidArgument("partition does not cover every reflecting hyperplane");
}

double covering_margin(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes, const IndexSet& S1,
                       const IndexSet& S2, const Vec& z, const Vec& w, std::array<double, 3>* parts = nullptr) {
  const double m1 = region_margin(hyperplanes, S1, z, w);
  const double m2 = region_margin(hyperplanes, S2, z, w);
  const double m3 = reg_margin(group, z, w);
  if (parts) *parts = {m1, m2, m3};
  return std::max({m1, m2, m3});
}

// Sup of a log-ratio over the doubled nested stream, remembering the sup over the first half.
struct SupTracker {
  double first = -kInf;
  double all = -kInf;
  Vec worst_z, worst_w;

  void add(double log_ratio, bool in_first, const Vec& z, const Vec& w) {
    if (in_first) first = std::max(first, log_ratio);
    if (log_ratio > all) {
      all = log_ratio;
      worst_z = z;
      worst_w = w;
    }
  }

  void fill(BoundReport& r) const {
    r.fitted_constant = std::exp(first);
    r.doubled_constant = std::exp(all);
    r.stability_ratio = r.fitted_constant > 0.0 ? r.doubled_constant / r.fitted_constant : kInf;
    r.worst_z = worst_z;
    r.worst_w = worst_w;
  }
};

// Residual of K_G(z,w) = (1/|G|) Σ_g K_H(g.z,w) det g, relative to the size of the summands.
double averaging_residual(const KernelEvaluator& kg, const KernelEvaluator& kh, const ReflectionGroup& group,
                          const Vec& z, const Vec& w) {
  cplx sum = 0.0;
  double magnitude = 0.0;
  for (const GroupElement& g : group.elements()) {
    const cplx term = kh.averaged_kernel(g.apply(z), w) * g.det();
    sum += term;
    magnitude += std::max(std::abs(term), std::abs(kg.bergman_kernel(g.apply(z), w)));
  }
  const double order = static_cast<double>(group.order());
  const cplx direct = kg.averaged_kernel(z, w);
  const double scale = std::max(std::abs(direct), magnitude / order);
  return scale == 0.0 ? 0.0 : std::abs(direct - sum / order) / scale;
}

double j_invariance_residual(const LinearFormProduct& jh, const ReflectionGroup& group, const Vec& z) {
  const double base = std::abs(jh.value(z));
  double worst = 0.0;
  for (const GroupElement& g : group.elements()) {
    const double moved = std::abs(jh.value(g.apply(z)));
    const double scale = std::max(base, moved);
    if (scale > 0.0) worst = std::max(worst, std::abs(moved - base) / scale);
  }
  return worst;
}

}  // namespace

RegionSpec RegionSpec::make(const ReflectionGroup& group, IndexSet S, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("region needs δ > 0");
  return RegionSpec{reflecting_hyperplanes(group), std::move(S), delta};
}

double region_margin(std::span<const Hyperplane> hyperplanes, const IndexSet& S, const Vec& z, const Vec& w) {
  double m = kInf;
  for (std::size_t y = 0; y < hyperplanes.size(); ++y) {
    if (std::find(S.begin(), S.end(), y) != S.end()) continue;
    const Vec& e = hyperplanes[y].root;
    m = std::min({m, std::abs(inner(z, e)), std::abs(inner(w, e))});
  }
  return m;
}

bool region_membership(const RegionSpec& spec, const Vec& z, const Vec& w) {
  return region_margin(spec.hyperplanes, spec.S, z, w) >= spec.delta;
}

double reg_margin(const ReflectionGroup& group, const Vec& z, const Vec& w) {
  double closest = kInf;
  for (const GroupElement& g : group.elements()) closest = std::min(closest, (g.apply(z) - w).norm());
  return (1.0 - z.norm()) + (1.0 - w.norm()) + closest;
}

std::pair<IndexSet, IndexSet> orbit_partition(const ReflectionGroup& group) {
  const auto hyperplanes = reflecting_hyperplanes(group);
  const auto orbits = orbit_decomposition(group, hyperplanes);
  if (orbits.size() < 2)
    throw InvalidArgument(group.name() + " has a single hyperplane orbit, so no nontrivial invariant partition exists");
  IndexSet rest;
  for (std::size_t o = 1; o < orbits.size(); ++o) rest.insert(rest.end(), orbits[o].begin(), orbits[o].end());
  std::sort(rest.begin(), rest.end());
  return {orbits[0], rest};
}

CoverReport find_covering_delta(const ReflectionGroup& group, const IndexSet& S1, const IndexSet& S2,
                                std::size_t samples, std::uint64_t seed) {
  if (group.dimension() != 2) throw InvalidArgument("the covering decomposition is restricted to C²");
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const auto hyperplanes = reflecting_hyperplanes(group);
  validate_partition(group, hyperplanes, S1, S2);

  CoverReport report;
  report.samples = samples;
  report.delta_found = kInf;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [z, w] = sample_pair(group, hyperplanes, seed, i);
    std::array<double, 3> parts;
    const double m = covering_margin(group, hyperplanes, S1, S2, z, w, &parts);
    if (m < report.delta_found) {
      report.delta_found = m;
      report.worst_z = z;
      report.worst_w = w;
      report.margins = parts;
    }
  }

  report.reverified = true;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [z, w] = sample_pair(group, hyperplanes, seed, i);
    if (covering_margin(group, hyperplanes, S1, S2, z, w) < report.delta_found) report.reverified = false;
  }

  const std::uint64_t fresh = derive_key(seed, 0xC0FE);
  report.fresh_delta = kInf;
  report.fresh_covered_at_half = true;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto [z, w] = sample_pair(group, hyperplanes, fresh, i);
    const double m = covering_margin(group, hyperplanes, S1, S2, z, w);
    report.fresh_delta = std::min(report.fresh_delta, m);
    if (m < 0.5 * report.delta_found) report.fresh_covered_at_half = false;
  }
  return report;
}

BoundReport normal_subgroup_bound(const ReflectionGroup& group, const NormalSubgroup& subgroup, double p, double delta,
                                  std::size_t samples, std::uint64_t seed) {
  if (!subgroup.reflecting_set_matches)
    throw InvalidArgument("the subgroup has reflecting hyperplanes outside S (R_H ≠ S)");
  if (!(delta > 0.0)) throw InvalidArgument("δ must be positive");
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const auto hyperplanes = reflecting_hyperplanes(group);
  const DomainSpec domain{group.dimension(), Normalization::probabilistic};
  auto gptr = std::make_shared<const ReflectionGroup>(group);
  auto hptr = std::make_shared<const ReflectionGroup>(subgroup.group);
  const KernelEvaluator kg(domain, gptr, p);
  const KernelEvaluator kh(domain, hptr, p);
  const RegionSpec region{hyperplanes, subgroup.generating_set, delta};

  BoundReport report;
  report.p = p;
  report.delta = delta;
  report.sample_count = samples;
  SupTracker sup;
  std::vector<double> terms(group.order());
  for (std::size_t i = 0; i < 2 * samples; ++i) {
    const auto pair = sample_pair(group, hyperplanes, seed, i);
    for (int order = 0; order < 2; ++order) {
      const Vec& z = order == 0 ? pair.first : pair.second;
      const Vec& w = order == 0 ? pair.second : pair.first;
      if (!region_membership(region, z, w)) continue;
      if (min_hyperplane_distance(hyperplanes, z) < kDiscard || min_hyperplane_distance(hyperplanes, w) < kDiscard ||
          near_singular_set(group, z, w)) {
        ++report.discarded;
        continue;
      }
      ++report.evaluated;
      for (std::size_t g = 0; g < group.order(); ++g)
        terms[g] = kh.log_abs_weighted(group.element(g).apply(z), w);
      const double log_ratio = kg.log_abs_weighted(z, w) - (log_sum_exp(terms) - std::log(double(group.order())));
      sup.add(log_ratio, i < samples, z, w);

      if (min_hyperplane_distance(hyperplanes, z) >= kIdentityClearance &&
          min_hyperplane_distance(hyperplanes, w) >= kIdentityClearance) {
        report.averaging_error = std::max(report.averaging_error, averaging_residual(kg, kh, group, z, w));
        report.j_invariance_error = std::max(report.j_invariance_error, j_invariance_residual(kh.jacobian(), group, z));
      }
    }
  }
  sup.fill(report);
  report.identities_hold = report.averaging_error <= kAveragingTol && report.j_invariance_error <= kJInvarianceTol;
  return report;
}

BoundReport normal_subgroup_bound(const ReflectionGroup& group, const IndexSet& S, double p, double delta,
                                  std::size_t samples, std::uint64_t seed) {
  const auto hyperplanes = reflecting_hyperplanes(group);
  return normal_subgroup_bound(group, normal_subgroup_from(group, hyperplanes, S), p, delta, samples, seed);
}

BoundReport main_estimate_check(const ReflectionGroup& group, const IndexSet& S1, const IndexSet& S2, double p,
                                std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const auto hyperplanes = reflecting_hyperplanes(group);
  validate_partition(group, hyperplanes, S1, S2);
  const NormalSubgroup g1 = normal_subgroup_from(group, hyperplanes, S1);
  const NormalSubgroup g2 = normal_subgroup_from(group, hyperplanes, S2);
  if (!g1.reflecting_set_matches || !g2.reflecting_set_matches)
    throw InvalidArgument("R_{G_j} ≠ S_j for the partition, so the main estimate does not apply");

  const DomainSpec domain{group.dimension(), Normalization::probabilistic};
  const KernelEvaluator kg(domain, std::make_shared<const ReflectionGroup>(group), p);
  const KernelEvaluator k1(domain, std::make_shared<const ReflectionGroup>(g1.group), p);
  const KernelEvaluator k2(domain, std::make_shared<const ReflectionGroup>(g2.group), p);

  BoundReport report;
  report.p = p;
  report.sample_count = samples;
  SupTracker sup;
  const double order = static_cast<double>(group.order());
  std::vector<double> terms(3 * group.order());
  for (std::size_t i = 0; i < 2 * samples; ++i) {
    const auto pair = sample_pair(group, hyperplanes, seed, i);
    for (int swap = 0; swap < 2; ++swap) {
      const Vec& z = swap == 0 ? pair.first : pair.second;
      const Vec& w = swap == 0 ? pair.second : pair.first;
      if (min_hyperplane_distance(hyperplanes, z) < kDiscard || min_hyperplane_distance(hyperplanes, w) < kDiscard ||
          near_singular_set(group, z, w)) {
        ++report.discarded;
        continue;
      }
      ++report.evaluated;
      for (std::size_t g = 0; g < group.order(); ++g) {
        const Vec gz = group.element(g).apply(z);
        terms[3 * g] = k1.log_abs_weighted(gz, w);
        terms[3 * g + 1] = k2.log_abs_weighted(gz, w);
        terms[3 * g + 2] = 0.0;
      }
      const double log_ratio = kg.log_abs_weighted(z, w) - (log_sum_exp(terms) - std::log(order));
      sup.add(log_ratio, i < samples, z, w);

      if (min_hyperplane_distance(hyperplanes, z) >= kIdentityClearance &&
          min_hyperplane_distance(hyperplanes, w) >= kIdentityClearance) {
        report.averaging_error = std::max({report.averaging_error, averaging_residual(kg, k1, group, z, w),
                                           averaging_residual(kg, k2, group, z, w)});
        report.j_invariance_error = std::max({report.j_invariance_error, j_invariance_residual(k1.jacobian(), group, z),
                                              j_invariance_residual(k2.jacobian(), group, z)});
      }
    }
  }
  sup.fill(report);
  report.identities_hold = report.averaging_error <= kAveragingTol && report.j_invariance_error <= kJInvarianceTol;
  return report;
}

BoundReport main_estimate_check(const ReflectionGroup& group, double p, std::size_t samples, std::uint64_t seed) {
  const auto [s1, s2] = orbit_partition(group);
  return main_estimate_check(group, s1, s2, p, samples, seed);
}

BoundReport division_quotient_bound(const KernelEvaluator& eval, double delta, std::size_t samples,
                                    std::uint64_t seed) {
  if (!(delta > 0.0)) throw InvalidArgument("δ must be positive");
  if (samples == 0) throw InvalidArgument("need at least one sample");
  const ReflectionGroup& group = eval.group();
  const auto hyperplanes = reflecting_hyperplanes(group);
  BoundReport report;
  report.delta = delta;
  report.sample_count = samples;
  SupTracker sup;
  for (std::size_t i = 0; i < 2 * samples; ++i) {
    const auto [z, w] = sample_pair(group, hyperplanes, seed, i);
    if (reg_margin(group, z, w) < delta) continue;
    if (min_hyperplane_distance(hyperplanes, z) < kIdentityClearance ||
        min_hyperplane_distance(hyperplanes, w) < kIdentityClearance || near_singular_set(group, z, w)) {
      ++report.discarded;
      continue;
    }
    ++report.evaluated;
    sup.add(std::log(std::abs(eval.division_quotient(z, w))), i < samples, z, w);
  }
  sup.fill(report);
  return report;
}

}  // namespace bergcov
