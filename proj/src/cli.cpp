#include "bergcov/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "bergcov/estimates.hpp"
#include "bergcov/quadrature.hpp"
#include "bergcov/random.hpp"
#include "bergcov/serialization.hpp"

namespace bergcov::cli {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string command;
  int m = 2;
  int ell = 0;  // 0: same as m
  int n = 2;
  int k = 1;
  int a = 2;
  int b = 1;
  double p = 2.0;
  double delta = 0.2;
  std::size_t samples = 0;  // 0: command default
  std::uint64_t seed = kDefaultSeed;
  std::string output;
  std::string format = "csv";
  std::string group_kind = "gml";
  std::string map_kind;
  std::string method = "schur";
  std::string integrand = "one";
  std::string downstairs = "one";
  std::vector<double> z{0.3, 0.0, 0.1, 0.0};
  std::vector<double> w{0.2, 0.1, -0.4, 0.0};
  std::vector<double> p_grid;
  std::size_t nodes = 2000;
  std::size_t test_points = 192;
  std::size_t sphere_points = 192;
  int orbit = 0;
  bool json = false;

  int effective_ell() const { return ell == 0 ? m : ell; }
  std::size_t samples_or(std::size_t fallback) const { return samples == 0 ? fallback : samples; }
};

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string json_number(double x) { return std::isfinite(x) ? fmt17(x) : "\"" + fmt17(x) + "\""; }
std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string format_vector(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fmt17(v[i]);
  return s;
}

class Reporter {
 public:
  Reporter(std::ostream& os, bool jsonl) : os_(os), jsonl_(jsonl) {}

  void banner(const RunConfig& cfg) {
    const std::vector<std::pair<std::string, std::string>> fields{
        {"m", std::to_string(cfg.m)},
        {"ell", std::to_string(cfg.effective_ell())},
        {"n", std::to_string(cfg.n)},
        {"k", std::to_string(cfg.k)},
        {"a", std::to_string(cfg.a)},
        {"b", std::to_string(cfg.b)},
        {"p", fmt17(cfg.p)},
        {"delta", fmt17(cfg.delta)},
        {"samples", std::to_string(cfg.samples)},
        {"group", cfg.group_kind},
        {"map", cfg.map_kind},
        {"method", cfg.method},
        {"nodes", std::to_string(cfg.nodes)},
        {"test_points", std::to_string(cfg.test_points)},
        {"sphere_points", std::to_string(cfg.sphere_points)},
        {"p_grid", format_vector(cfg.p_grid)},
        {"format", cfg.format},
    };
    if (jsonl_) {
      os_ << "{\"type\":\"banner\",\"program\":\"bergcov\",\"version\":" << json_string(kVersion)
          << ",\"command\":" << json_string(cfg.command) << ",\"seed\":" << cfg.seed << ",\"config\":{";
      for (std::size_t i = 0; i < fields.size(); ++i)
        os_ << (i ? "," : "") << json_string(fields[i].first) << ":" << json_string(fields[i].second);
      os_ << "}}\n";
    } else {
      os_ << "# bergcov " << kVersion << " command=" << cfg.command << " seed=" << cfg.seed;
      for (const auto& [key, value] : fields) os_ << " " << key << "=" << value;
      os_ << "\n";
      os_ << "quantity,estimate_re,estimate_im,stderr,samples,seed\n";
    }
  }

  void row(const std::string& quantity, cplx value, double std_error = 0.0, std::size_t samples = 0,
           std::uint64_t seed = 0) {
    if (jsonl_) {
      os_ << "{\"type\":\"row\",\"quantity\":" << json_string(quantity) << ",\"estimate_re\":" << json_number(value.real())
          << ",\"estimate_im\":" << json_number(value.imag()) << ",\"stderr\":" << json_number(std_error)
          << ",\"samples\":" << samples << ",\"seed\":" << seed << "}\n";
    } else {
      os_ << csv_field(quantity) << "," << fmt17(value.real()) << "," << fmt17(value.imag()) << "," << fmt17(std_error)
          << "," << samples << "," << seed << "\n";
    }
    os_.flush();
  }

  void row(const std::string& quantity, double value) { row(quantity, cplx(value, 0.0)); }

  void note(const std::string& text) {
    if (jsonl_)
      os_ << "{\"type\":\"note\",\"text\":" << json_string(text) << "}\n";
    else
      os_ << "# " << text << "\n";
  }

  /// Identity-class check: a failure makes the run exit with code 1.
  void check(const std::string& name, bool pass) {
    ++checks_;
    if (!pass) ++failed_;
    if (jsonl_)
      os_ << "{\"type\":\"check\",\"name\":" << json_string(name) << ",\"pass\":" << (pass ? "true" : "false") << "}\n";
    else
      os_ << "# check " << name << " " << (pass ? "pass" : "FAIL") << "\n";
  }

  void summary() {
    const char* status = failed_ == 0 ? "pass" : "fail";
    if (jsonl_)
      os_ << "{\"type\":\"summary\",\"checks\":" << checks_ << ",\"failed\":" << failed_ << ",\"status\":\"" << status
          << "\"}\n";
    else
      os_ << "# summary checks=" << checks_ << " failed=" << failed_ << " status=" << status << "\n";
    os_.flush();
  }

  int exit_code() const { return failed_ == 0 ? kSuccess : kIdentityFailure; }

 private:
  std::ostream& os_;
  bool jsonl_;
  int checks_ = 0;
  int failed_ = 0;
};

Vec point_from(const std::vector<double>& coords, const char* flag) {
  if (coords.size() != 4) throw UsageError(std::string(flag) + " takes four reals: re1 im1 re2 im2");
  Vec z = make_vec({cplx(coords[0], coords[1]), cplx(coords[2], coords[3])});
  if (!(z.squaredNorm() < 1.0)) throw UsageError(std::string(flag) + " must lie inside the unit ball");
  return z;
}

void validate_gml(const RunConfig& cfg) {
  if (cfg.m < 1) throw UsageError("--m must be at least 1");
  if (cfg.effective_ell() < 1) throw UsageError("--ell must be at least 1");
  if (cfg.m % cfg.effective_ell() != 0)
    throw UsageError("--ell " + std::to_string(cfg.effective_ell()) + " does not divide --m " + std::to_string(cfg.m));
}

void validate_p(double p) {
  if (!(p > 1.0 && std::isfinite(p))) throw UsageError("--p must lie in (1, inf)");
}

ReflectionGroup gml_group(const RunConfig& cfg, int n = 2) {
  validate_gml(cfg);
  return build_g_mln(cfg.m, cfg.effective_ell(), n);
}

std::shared_ptr<const ReflectionGroup> selected_group(const RunConfig& cfg) {
  if (cfg.group_kind == "gml") return std::make_shared<const ReflectionGroup>(gml_group(cfg));
  if (cfg.group_kind == "reflection") return std::make_shared<const ReflectionGroup>(single_reflection_group(2));
  if (cfg.group_kind == "trivial")
    return std::make_shared<const ReflectionGroup>(
        close_group(std::vector<GroupElement>{GroupElement::identity(2)}, "trivial"));
  if (cfg.group_kind == "diagonal") return std::make_shared<const ReflectionGroup>(diagonal_group(cfg.a, cfg.b));
  throw UsageError("unknown --group '" + cfg.group_kind + "'");
}

std::shared_ptr<const OrbitMap> selected_map(const RunConfig& cfg, const std::string& fallback) {
  const std::string kind = cfg.map_kind.empty() ? fallback : cfg.map_kind;
  if (kind == "gml2") {
    validate_gml(cfg);
    return std::make_shared<const OrbitMap>(orbit_map_gml2(cfg.m, cfg.effective_ell()));
  }
  if (kind == "pik") {
    if (cfg.k < 0 || cfg.k > 6) throw UsageError("--k must be in [0, 6]");
    return std::make_shared<const OrbitMap>(orbit_map_pik(cfg.k));
  }
  if (kind == "diagonal") {
    if (cfg.a < 1 || cfg.b < 1) throw UsageError("--a and --b must be positive");
    return std::make_shared<const OrbitMap>(orbit_map_diagonal(cfg.a, cfg.b));
  }
  throw UsageError("unknown --map '" + kind + "'");
}

std::string describe_vec(const Vec& v) {
  std::ostringstream s;
  s << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << fmt17(v(i).real()) << "+" << fmt17(v(i).imag()) << "i";
  s << ")";
  return s.str();
}

std::string describe_set(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

void emit_check_rows(Reporter& rep, const CheckReport& report) {
  for (const CheckRow& row : report.rows) {
    rep.row(report.name + "." + row.quantity, row.estimate.value, row.estimate.std_error, row.estimate.count, row.seed);
    if (row.expected) {
      rep.note(row.quantity + " expected=" + fmt17(row.expected->real()) + "+" + fmt17(row.expected->imag()) +
               "i band=" + fmt17(row.band));
      rep.check(report.name + "." + row.quantity, row.pass);
    }
  }
  if (report.rerun) rep.note(report.name + " was rerun once with 4x samples");
}

// ---------------------------------------------------------------------------
// Commands

void cmd_group(const RunConfig& cfg, Reporter& rep, std::ostream& out) {
  if (cfg.n < 1 || cfg.n > kMaxDim) throw UsageError("--n must be in [1, 4]");
  const ReflectionGroup g = gml_group(cfg, cfg.n);
  if (cfg.json) {
    out << group_to_json(g).dump(2) << "\n";
    return;
  }
  rep.banner(cfg);
  const auto hyperplanes = reflecting_hyperplanes(g);
  const auto orbits = orbit_decomposition(g, hyperplanes);
  rep.row("order", static_cast<double>(g.order()));
  rep.row("reflections", static_cast<double>(g.reflections().size()));
  rep.row("hyperplanes", static_cast<double>(hyperplanes.size()));
  rep.row("orbits", static_cast<double>(orbits.size()));
  rep.note("group " + g.name() + " generated_by_reflections=" + (g.generated_by_reflections() ? "true" : "false"));
  for (std::size_t i = 0; i < hyperplanes.size(); ++i)
    rep.note("hyperplane " + std::to_string(i) + " root=" + describe_vec(hyperplanes[i].root) +
             " multiplicity=" + std::to_string(hyperplanes[i].multiplicity) +
             " orbit=" + std::to_string(hyperplanes[i].orbit_id));
  for (std::size_t o = 0; o < orbits.size(); ++o) rep.note("orbit " + std::to_string(o) + " " + describe_set(orbits[o]));
  rep.check("group_axioms", g.satisfies_group_axioms());
  int excess = 0;
  for (const Hyperplane& h : hyperplanes) excess += h.multiplicity - 1;
  rep.check("sum_multiplicity_minus_one_equals_reflections", excess == static_cast<int>(g.reflections().size()));
}

void print_tree(const ReductionTree& t, Reporter& rep, int depth) {
  rep.note(std::string(2 * static_cast<std::size_t>(depth), ' ') + t.node.name() + " order=" +
           std::to_string(t.node.order()) + " orbits=" + std::to_string(t.orbit_split.size()));
  for (const ReductionTree& c : t.children) print_tree(c, rep, depth + 1);
}

void cmd_tree(const RunConfig& cfg, Reporter& rep) {
  const ReflectionGroup g = gml_group(cfg);
  rep.banner(cfg);
  const ReductionTree tree = reduction_tree(g);
  print_tree(tree, rep, 0);
  const auto leaves = tree.leaves();
  rep.row("depth", static_cast<double>(tree.depth()));
  rep.row("leaves", static_cast<double>(leaves.size()));
  rep.note(std::string("reflecting sets match at every split: ") + (tree.reflecting_sets_match ? "true" : "false"));
  bool all_found = true;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    rep.row("leaf_" + std::to_string(i) + "_order", static_cast<double>(leaves[i]->order()));
    const auto h = conjugacy_witness(*leaves.front(), *leaves[i]);
    if (h) {
      rep.note("leaf " + std::to_string(i) + " = h·leaf0·h^-1 with h = " + matrix_to_json(*h).dump());
    } else {
      rep.note("leaf " + std::to_string(i) + ": no conjugacy witness found");
      all_found = false;
    }
  }
  rep.check("leaves_pairwise_conjugate", all_found);
}

void cmd_map(const RunConfig& cfg, Reporter& rep) {
  const auto map = selected_map(cfg, "gml2");
  rep.banner(cfg);
  rep.note("map " + map->name() + " group " + map->group().name() + " order " + std::to_string(map->group().order()));
  for (std::size_t i = 0; i < map->components().size(); ++i)
    rep.note("component " + std::to_string(i) + " " + polynomial_to_json(map->components()[i]).dump());
  rep.note("jacobian " + polynomial_to_json(symbolic_jacobian(*map)).dump());
  const std::size_t samples = cfg.samples_or(1000);
  const double skew = jacobian_skew_error(*map, static_cast<int>(samples), cfg.seed);
  rep.row("jacobian_skew_error", skew);
  rep.check("jacobian_skew", skew <= 1e-10);
  if (const auto c = map->jacobian_constant()) {
    rep.row("jacobian_constant", *c);
    rep.row("jacobian_constant_modulus", std::abs(*c));
    const double err =
        jacobian_proportionality_error(*map, jacobian_polynomial(map->group()), *c, static_cast<int>(samples), cfg.seed);
    rep.row("proportionality_error", err);
    rep.check("jacobian_proportional_to_JG", err <= 1e-10);
  } else {
    rep.note("J(pi)/J_G is not constant for this map");
    rep.check("jacobian_proportional_to_JG", false);
  }
}

void cmd_kernel_eval(const RunConfig& cfg, Reporter& rep) {
  validate_p(cfg.p);
  const Vec z = point_from(cfg.z, "--z");
  const Vec w = point_from(cfg.w, "--w");
  const KernelEvaluator eval(DomainSpec{}, selected_group(cfg), cfg.p);
  rep.banner(cfg);
  rep.note("group " + eval.group().name() + " order " + std::to_string(eval.group().order()));
  const cplx k = eval.bergman_kernel(z, w);
  const cplx kw = eval.averaged_kernel(z, w);
  const cplx kz = eval.averaged_kernel_alt(z, w, KernelForm::z_side);
  const cplx kd = eval.averaged_kernel_alt(z, w, KernelForm::double_sum);
  rep.row("bergman_kernel", k);
  rep.row("averaged_kernel_w_side", kw);
  rep.row("averaged_kernel_z_side", kz);
  rep.row("averaged_kernel_double_sum", kd);
  const double scale = std::max({std::abs(kw), std::abs(kz), std::abs(kd), 1e-300});
  rep.check("averaged_forms_agree", std::abs(kw - kz) <= 1e-12 * scale && std::abs(kw - kd) <= 1e-12 * scale);
  const cplx back = eval.averaged_kernel(w, z);
  rep.check("hermitian_symmetry", std::abs(kw - std::conj(back)) <= 1e-12 * scale);
  try {
    rep.row("weighted_kernel", eval.weighted_kernel(z, w));
    rep.row("division_quotient", eval.division_quotient(z, w));
  } catch (const SingularInput& e) {
    rep.note(std::string("skipped: ") + e.what());
  }
}

std::vector<double> appendix_grid(const RunConfig& cfg) {
  if (!cfg.p_grid.empty()) return cfg.p_grid;
  return {4.0 / 3.0, 2.0, 4.0};
}

void cmd_appendix(const RunConfig& cfg, Reporter& rep) {
  const auto grid = appendix_grid(cfg);
  for (double p : grid) validate_p(p);
  const std::size_t samples = cfg.samples_or(10000);
  rep.banner(cfg);
  const double c = appendix_series_constant();
  rep.row("series_constant", c);
  rep.check("series_constant_416_over_27", std::abs(c - 416.0 / 27.0) <= 1e-12 * 416.0 / 27.0);
  std::map<double, AppendixReport> reports;
  for (double p : grid) {
    const AppendixReport r = appendix_bound_check(p, samples, cfg.seed);
    reports.emplace(p, r);
    const std::string tag = "p=" + fmt17(p) + ".";
    rep.row(tag + "fitted_region", cplx(r.fitted_region), 0.0, r.pairs, cfg.seed);
    rep.row(tag + "ceiling_region", r.ceiling_region);
    rep.row(tag + "fitted_series", cplx(r.fitted_series), 0.0, r.pairs, cfg.seed);
    rep.row(tag + "ceiling_series", r.ceiling_series);
    rep.row(tag + "fitted_ball", cplx(r.fitted_ball), 0.0, r.pairs, cfg.seed);
    rep.row(tag + "ceiling_ball", r.ceiling_ball);
    rep.row(tag + "max_ratio_in_region", r.max_ratio_in_region);
    rep.note(tag + " pairs=" + std::to_string(r.pairs) + " in_region=" + std::to_string(r.pairs_in_region) +
             " discarded=" + std::to_string(r.discarded));
    rep.check(tag + "region_bound", r.holds_region);
    rep.check(tag + "series_bound", r.holds_series);
    rep.check(tag + "ball_bound", r.holds_ball);
  }
  for (const auto& [p, r] : reports) {
    const double q = p / (p - 1.0);
    if (!(p < q)) continue;
    for (const auto& [p2, r2] : reports) {
      if (std::abs(p2 - q) > 1e-9) continue;
      auto close = [](double x, double y) { return std::abs(x - y) <= 0.1 * std::max(std::abs(x), std::abs(y)); };
      rep.check("duality_p=" + fmt17(p) + "_vs_" + fmt17(p2),
                close(r.fitted_region, r2.fitted_region) && close(r.fitted_series, r2.fitted_series) &&
                    close(r.fitted_ball, r2.fitted_ball));
    }
  }
}

void cmd_covering(const RunConfig& cfg, Reporter& rep) {
  const ReflectionGroup g = gml_group(cfg);
  const std::size_t samples = cfg.samples_or(100000);
  const auto [s1, s2] = orbit_partition(g);
  rep.banner(cfg);
  const CoverReport r = find_covering_delta(g, s1, s2, samples, cfg.seed);
  rep.note("partition S1=" + describe_set(s1) + " S2=" + describe_set(s2));
  rep.row("delta_found", cplx(r.delta_found), 0.0, samples, cfg.seed);
  rep.row("margin_S1", r.margins[0]);
  rep.row("margin_S2", r.margins[1]);
  rep.row("margin_reg", r.margins[2]);
  rep.row("fresh_delta", cplx(r.fresh_delta), 0.0, samples, derive_key(cfg.seed, 0xC0FE));
  rep.note("worst pair z=" + describe_vec(r.worst_z) + " w=" + describe_vec(r.worst_w));
  rep.check("delta_positive", r.delta_found > 0.0);
  rep.check("covering_reverified", r.reverified);
  rep.check("fresh_seed_covered_at_half_delta", r.fresh_covered_at_half);
}

void emit_bound(Reporter& rep, const BoundReport& r, const RunConfig& cfg, const std::string& prefix) {
  rep.row(prefix + "fitted_constant", cplx(r.fitted_constant), 0.0, r.sample_count, cfg.seed);
  rep.row(prefix + "doubled_constant", cplx(r.doubled_constant), 0.0, 2 * r.sample_count, cfg.seed);
  rep.row(prefix + "stability_ratio", r.stability_ratio);
  rep.row(prefix + "averaging_error", r.averaging_error);
  rep.row(prefix + "j_invariance_error", r.j_invariance_error);
  rep.note(prefix + "evaluated=" + std::to_string(r.evaluated) + " discarded=" + std::to_string(r.discarded) +
           " stable=" + (r.stable() ? "true" : "false"));
  rep.check(prefix + "averaging_identity", r.averaging_error <= kAveragingTol);
  rep.check(prefix + "j_invariance", r.j_invariance_error <= kJInvarianceTol);
}

void cmd_nsl(const RunConfig& cfg, Reporter& rep) {
  validate_p(cfg.p);
  if (!(cfg.delta > 0.0)) throw UsageError("--delta must be positive");
  const ReflectionGroup g = gml_group(cfg);
  const auto hyperplanes = reflecting_hyperplanes(g);
  const auto orbits = orbit_decomposition(g, hyperplanes);
  if (cfg.orbit < 0 || static_cast<std::size_t>(cfg.orbit) >= orbits.size()) throw UsageError("--orbit out of range");
  const std::size_t samples = cfg.samples_or(20000);
  rep.banner(cfg);
  const IndexSet& S = orbits[static_cast<std::size_t>(cfg.orbit)];
  const NormalSubgroup h = normal_subgroup_from(g, hyperplanes, S);
  rep.note("S=" + describe_set(S) + " |H|=" + std::to_string(h.group.order()) +
           " R_H=S: " + (h.reflecting_set_matches ? "true" : "false"));
  const BoundReport r = normal_subgroup_bound(g, h, cfg.p, cfg.delta, samples, cfg.seed);
  emit_bound(rep, r, cfg, "");
}

void cmd_main(const RunConfig& cfg, Reporter& rep) {
  validate_p(cfg.p);
  const ReflectionGroup g = gml_group(cfg);
  const std::size_t samples = cfg.samples_or(20000);
  const auto [s1, s2] = orbit_partition(g);
  rep.banner(cfg);
  rep.note("partition S1=" + describe_set(s1) + " S2=" + describe_set(s2));
  const BoundReport r = main_estimate_check(g, s1, s2, cfg.p, samples, cfg.seed);
  emit_bound(rep, r, cfg, "");
  rep.note("worst pair z=" + describe_vec(r.worst_z) + " w=" + describe_vec(r.worst_w));
  if (cfg.delta > 0.0) {
    const KernelEvaluator eval(DomainSpec{}, std::make_shared<const ReflectionGroup>(g));
    const BoundReport q = division_quotient_bound(eval, cfg.delta, samples, cfg.seed);
    rep.row("division_quotient_sup_reg", cplx(q.fitted_constant), 0.0, q.sample_count, cfg.seed);
    rep.row("division_quotient_sup_reg_doubled", cplx(q.doubled_constant), 0.0, 2 * q.sample_count, cfg.seed);
  }
}

void cmd_sweep(const RunConfig& cfg, Reporter& rep) {
  std::vector<double> grid = cfg.p_grid.empty() ? std::vector<double>{1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 4.0} : cfg.p_grid;
  for (double p : grid) validate_p(p);
  std::vector<std::pair<std::string, SweepMethod>> methods;
  if (cfg.method == "schur" || cfg.method == "both") methods.emplace_back("schur", SweepMethod::schur);
  if (cfg.method == "power" || cfg.method == "both") methods.emplace_back("power", SweepMethod::grid_power);
  if (methods.empty()) throw UsageError("--method must be schur, power or both");
  if (cfg.nodes < 2) throw UsageError("--nodes must be at least 2");
  if (cfg.test_points == 0 || cfg.sphere_points == 0) throw UsageError("--test-points and --sphere-points must be positive");
  const auto group = cfg.group_kind == "gml" && cfg.map_kind.empty()
                         ? std::make_shared<const ReflectionGroup>(single_reflection_group(2))
                         : selected_group(cfg);
  const KernelEvaluator eval(DomainSpec{}, group);
  rep.banner(cfg);
  rep.note("group " + group->name());
  SweepParams params;
  params.nodes = cfg.nodes;
  params.test_points = cfg.test_points;
  params.sphere_points = cfg.sphere_points;
  params.seed = cfg.seed;
  for (const auto& [name, method] : methods) {
    const std::vector<SweepRow> rows = norm_sweep(eval, grid, method, params);
    for (const SweepRow& row : rows) {
      rep.row(name + ".p=" + fmt17(row.p), cplx(row.indicator), 0.0, row.nodes, cfg.seed);
      if (method == SweepMethod::schur) rep.row(name + ".best_s.p=" + fmt17(row.p), row.best_s);
    }
    for (const SweepRow& a : rows) {
      for (const SweepRow& b : rows) {
        if (!(a.p < 2.0) || std::abs(a.p / (a.p - 1.0) - b.p) > 1e-12) continue;
        const double gap = std::abs(a.indicator - b.indicator) / std::max(a.indicator, b.indicator);
        rep.check(name + ".conjugate_symmetry.p=" + fmt17(a.p), gap <= 1e-9);
      }
    }
  }
}

std::vector<Vec> reproducing_points() {
  return {make_vec({0.3, 0.1}), make_vec({-0.2, 0.4}), make_vec({cplx(0.1, 0.2), -0.3}),
          make_vec({0.5, cplx(0.0, 0.2)}), make_vec({-0.35, cplx(-0.25, 0.1)})};
}

void cmd_reproducing(const RunConfig& cfg, Reporter& rep) {
  const auto map = selected_map(cfg, "diagonal");
  if (cfg.downstairs != "one" && cfg.downstairs != "first") throw UsageError("--u must be one or first");
  const std::size_t samples = cfg.samples_or(1000000);
  rep.banner(cfg);
  Polynomial u = cfg.downstairs == "one" ? Polynomial::constant(2, 1.0) : Polynomial::variable(2, 0);
  const TwistedFunction v(map, u);
  const KernelEvaluator eval(DomainSpec{}, map->group_ptr());
  rep.note("v = J(pi)·u(pi) for map " + map->name() + ", u = " + cfg.downstairs);
  emit_check_rows(rep, reproducing_check(eval, v, reproducing_points(), samples, cfg.seed));
  if (map->group().order() > 1) {
    const BallFunction one = [](const Vec&) { return cplx(1.0); };
    CheckReport proj = reproducing_check(eval, projected(map->group(), one), {reproducing_points().front()}, samples,
                                         derive_key(cfg.seed, 1));
    proj.name = "projected_constant";
    emit_check_rows(rep, proj);
  }
}

void cmd_cov(const RunConfig& cfg, Reporter& rep) {
  const auto map = selected_map(cfg, "diagonal");
  const std::size_t samples = cfg.samples_or(1000000);
  rep.banner(cfg);
  rep.note("map " + map->name() + " degree " + std::to_string(map->degree()));
  emit_check_rows(rep, change_of_variable_check(*map, samples, cfg.seed));
}

void cmd_meanvalue(const RunConfig& cfg, Reporter& rep) {
  const std::size_t samples = cfg.samples_or(100000);
  rep.banner(cfg);
  const std::vector<std::pair<std::string, BallFunction>> functions{
      {"one", [](const Vec&) { return cplx(1.0); }},
      {"z1z2", [](const Vec& z) { return z(0) * z(1); }},
      {"three_plus_five_z1_sq", [](const Vec& z) { return 3.0 + 5.0 * z(0) * z(0); }},
  };
  for (const auto& [name, f] : functions) {
    CheckReport r = mean_value_check(f, samples, cfg.seed);
    r.name = "mean_value_" + name;
    emit_check_rows(rep, r);
  }
}

void cmd_integrate(const RunConfig& cfg, Reporter& rep) {
  const std::size_t samples = cfg.samples_or(100000);
  BallFunction f;
  cplx expected;
  if (cfg.integrand == "one") {
    f = [](const Vec&) { return cplx(1.0); };
    expected = std::numbers::pi * std::numbers::pi / 2.0;
  } else if (cfg.integrand == "abs_z1_sq") {
    f = [](const Vec& z) { return cplx(std::norm(z(0))); };
    expected = std::numbers::pi * std::numbers::pi / 6.0;
  } else if (cfg.integrand == "z1") {
    f = [](const Vec& z) { return z(0); };
    expected = 0.0;
  } else {
    throw UsageError("--f must be one, abs_z1_sq or z1");
  }
  rep.banner(cfg);
  const Sampler sampler(DomainSpec{}, cfg.seed, samples);
  const MCEstimate est = integrate(sampler, f);
  rep.row("integral_" + cfg.integrand, est.value, est.std_error, est.count, cfg.seed);
  rep.check("integral_" + cfg.integrand + "_within_3_stderr", std::abs(est.value - expected) <= 3.0 * est.std_error);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      err << "error: " << kSeedEnv << " must be a non-negative integer\n";
      return kUsageError;
    }
  }

  CLI::App app{"Finite reflection groups, averaged Bergman kernels of the ball and their estimates", "bergcov"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.add_option("--seed", cfg.seed, std::string("RNG seed (default from ") + kSeedEnv + ")")->capture_default_str();
  app.add_option("--output", cfg.output, "Write the report to this file instead of stdout");
  app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
  app.add_option("--samples", cfg.samples, "Sample count (0 selects the command default)")->capture_default_str();

  auto add_gml = [&](CLI::App* sub) {
    sub->add_option("--m", cfg.m, "m of G(m,l,2)")->capture_default_str();
    sub->add_option("--ell", cfg.ell, "l of G(m,l,2) (0 means l = m)")->capture_default_str();
  };
  auto add_p = [&](CLI::App* sub) { sub->add_option("--p", cfg.p, "Exponent p in (1, inf)")->capture_default_str(); };
  auto add_map = [&](CLI::App* sub, const std::string& fallback) {
    sub->add_option("--map", cfg.map_kind, "Orbit map: gml2 (m, ell), pik (k) or diagonal (a, b); default " + fallback);
    sub->add_option("--k", cfg.k, "k of pik")->capture_default_str();
    sub->add_option("--a", cfg.a, "First exponent of diagonal")->capture_default_str();
    sub->add_option("--b", cfg.b, "Second exponent of diagonal")->capture_default_str();
    add_gml(sub);
  };
  auto add_group_kind = [&](CLI::App* sub) {
    sub->add_option("--group", cfg.group_kind, "Group: gml, reflection, trivial or diagonal")->capture_default_str();
    add_gml(sub);
    sub->add_option("--a", cfg.a, "First exponent of the diagonal group")->capture_default_str();
    sub->add_option("--b", cfg.b, "Second exponent of the diagonal group")->capture_default_str();
  };

  std::map<CLI::App*, std::function<void(Reporter&)>> handlers;
  auto* group = app.add_subcommand("group", "Order, reflections, hyperplanes and orbits of G(m,l,n)");
  add_gml(group);
  group->add_option("--n", cfg.n, "Dimension n")->capture_default_str();
  group->add_flag("--json", cfg.json, "Print the versioned JSON document instead of a report");

  auto* tree = app.add_subcommand("tree", "Reduction tree of G(m,l,2) with conjugacy witnesses");
  add_gml(tree);
  handlers[tree] = [&](Reporter& r) { cmd_tree(cfg, r); };

  auto* map = app.add_subcommand("map", "Orbit map, symbolic Jacobian and fitted constant");
  add_map(map, "gml2");
  handlers[map] = [&](Reporter& r) { cmd_map(cfg, r); };

  auto* kernel = app.add_subcommand("kernel", "Kernel evaluation");
  kernel->require_subcommand(1);
  auto* keval = kernel->add_subcommand("eval", "Evaluate K, the three K_G forms, K_{G,p} and M at (z, w)");
  add_group_kind(keval);
  add_p(keval);
  keval->add_option("--z", cfg.z, "z as re1 im1 re2 im2")->expected(4);
  keval->add_option("--w", cfg.w, "w as re1 im1 re2 im2")->expected(4);
  handlers[keval] = [&](Reporter& r) { cmd_kernel_eval(cfg, r); };
  auto* kapp = kernel->add_subcommand("appendix", "Fitted constants of the explicit bounds for diag(-1,1)");
  kapp->add_option("--p", cfg.p_grid, "Exponents (default 4/3 2 4)");
  handlers[kapp] = [&](Reporter& r) { cmd_appendix(cfg, r); };

  auto* verify = app.add_subcommand("verify", "Verification suites");
  verify->require_subcommand(1);
  auto* vcov = verify->add_subcommand("covering", "Sampled covering delta for the two-set orbit partition");
  add_gml(vcov);
  handlers[vcov] = [&](Reporter& r) { cmd_covering(cfg, r); };
  auto* vnsl = verify->add_subcommand("nsl", "Normal subgroup bound on E(S, delta)");
  add_gml(vnsl);
  add_p(vnsl);
  vnsl->add_option("--delta", cfg.delta, "Region distance delta")->capture_default_str();
  vnsl->add_option("--orbit", cfg.orbit, "Hyperplane orbit generating S")->capture_default_str();
  handlers[vnsl] = [&](Reporter& r) { cmd_nsl(cfg, r); };
  auto* vmain = verify->add_subcommand("main", "Sampled constant of the main kernel estimate");
  add_gml(vmain);
  add_p(vmain);
  vmain->add_option("--delta", cfg.delta, "delta for the E_reg quotient bound (0 skips it)")->capture_default_str();
  handlers[vmain] = [&](Reporter& r) { cmd_main(cfg, r); };
  auto* vsweep = verify->add_subcommand("sweep", "Norm indicator of |K_{G,p}| over a p grid");
  vsweep->add_option("--group", cfg.group_kind, "Group (default reflection): gml, reflection, trivial or diagonal");
  add_gml(vsweep);
  vsweep->add_option("--p", cfg.p_grid, "Exponents (default 1.05 1.1 1.25 1.5 2 3 4)");
  vsweep->add_option("--method", cfg.method, "schur, power or both")->capture_default_str();
  vsweep->add_option("--nodes", cfg.nodes, "Monte Carlo nodes of the power method")->capture_default_str();
  vsweep->add_option("--test-points", cfg.test_points, "Sampled points for the Schur sup")->capture_default_str();
  vsweep->add_option("--sphere-points", cfg.sphere_points, "Sphere samples per radial node (Schur)")
      ->capture_default_str();
  handlers[vsweep] = [&](Reporter& r) {
    if (vsweep->count("--group") == 0) cfg.group_kind = "reflection";
    cmd_sweep(cfg, r);
  };
  auto* vrep = verify->add_subcommand("reproducing", "Reproducing property of K_G for a twisted function");
  add_map(vrep, "diagonal");
  vrep->add_option("--u", cfg.downstairs, "Downstairs polynomial: one or first")->capture_default_str();
  handlers[vrep] = [&](Reporter& r) { cmd_reproducing(cfg, r); };
  auto* vcv = verify->add_subcommand("cov", "Change-of-variable identity for an orbit map");
  add_map(vcv, "diagonal");
  handlers[vcv] = [&](Reporter& r) { cmd_cov(cfg, r); };
  auto* vmv = verify->add_subcommand("meanvalue", "Mean value property over the ball");
  handlers[vmv] = [&](Reporter& r) { cmd_meanvalue(cfg, r); };
  auto* vapp = verify->add_subcommand("appendix", "Series constant and explicit bounds for diag(-1,1)");
  vapp->add_option("--p", cfg.p_grid, "Exponents (default 4/3 2 4)");
  handlers[vapp] = [&](Reporter& r) { cmd_appendix(cfg, r); };

  auto* quad = app.add_subcommand("quad", "Monte Carlo quadrature on the ball");
  quad->require_subcommand(1);
  auto* qint = quad->add_subcommand("integrate", "Integrate a test function over B_2");
  qint->add_option("--f", cfg.integrand, "one, abs_z1_sq or z1")->capture_default_str();
  handlers[qint] = [&](Reporter& r) { cmd_integrate(cfg, r); };
  auto* qcov = quad->add_subcommand("cov", "Change-of-variable identity");
  add_map(qcov, "diagonal");
  handlers[qcov] = [&](Reporter& r) { cmd_cov(cfg, r); };
  auto* qrep = quad->add_subcommand("reproducing", "Reproducing property");
  add_map(qrep, "diagonal");
  qrep->add_option("--u", cfg.downstairs, "Downstairs polynomial: one or first")->capture_default_str();
  handlers[qrep] = [&](Reporter& r) { cmd_reproducing(cfg, r); };
  auto* qmv = quad->add_subcommand("meanvalue", "Mean value property");
  handlers[qmv] = [&](Reporter& r) { cmd_meanvalue(cfg, r); };

  std::vector<std::string> argv_storage{"bergcov"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  CLI::App* leaf = &app;
  std::string command;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }
  cfg.command = command;

  std::ofstream file;
  std::ostream* sink = &out;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "error: cannot open " << cfg.output << " for writing\n";
      return kUsageError;
    }
    sink = &file;
  }
  Reporter reporter(*sink, cfg.format == "jsonl");
  try {
    if (leaf == group) {
      cmd_group(cfg, reporter, *sink);
      if (cfg.json) return kSuccess;
    } else {
      handlers.at(leaf)(reporter);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IdentityCheckFailed& e) {
    reporter.check(std::string("internal: ") + e.what(), false);
    reporter.summary();
    err << "identity check failed: " << e.what() << "\n";
    return kIdentityFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIdentityFailure;
  }
  reporter.summary();
  return reporter.exit_code();
}

}  // namespace bergcov::cli
