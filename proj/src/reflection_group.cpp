#include "bergcov/reflection_group.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace bergcov {

Vec canonical_root(const Vec& v, double zero_tol) {
  const double norm = v.norm();
  if (norm <= 0.0) throw InvalidArgument("canonical_root: zero vector");
  Vec u = v / norm;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > zero_tol) {
      const cplx phase = std::conj(u(i)) / std::abs(u(i));
      u *= phase;
      u(i) = cplx(u(i).real(), 0.0);
      break;
    }
  }
  return u;
}

Mat complete_unitary(const std::vector<Vec>& leading, int n) {
  Mat q = Mat::Zero(n, n);
  int filled = 0;
  auto push = [&](Vec v) {
    for (int j = 0; j < filled; ++j) v -= q.col(j).dot(v) * q.col(j);
    // second pass for stability
    for (int j = 0; j < filled; ++j) v -= q.col(j).dot(v) * q.col(j);
    const double norm = v.norm();
    if (norm < 1e-10) return false;
    q.col(filled++) = v / norm;
    return true;
  };
  for (const Vec& v : leading) {
    if (!push(v)) throw InvalidArgument("complete_unitary: leading vectors are dependent");
  }
  for (int i = 0; i < n && filled < n; ++i) push(Vec::Unit(n, i));
  return q;
}

// ---------------------------------------------------------------------------
// GroupElement

namespace {

std::size_t element_order(const Mat& m, std::size_t max_order) {
  const Mat id = Mat::Identity(m.rows(), m.cols());
  Mat power = m;
  for (std::size_t k = 1; k <= max_order; ++k) {
    if ((power - id).norm() <= tol::kElement) return k;
    power = (power * m).eval();
  }
  return 0;
}

}  // namespace

GroupElement::GroupElement(Mat matrix, std::size_t max_order) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1 || matrix_.rows() > kMaxDim)
    throw InvalidArgument("group element must be an n×n matrix with 1 ≤ n ≤ 4");
  const Mat id = Mat::Identity(matrix_.rows(), matrix_.cols());
  if ((matrix_ * matrix_.adjoint() - id).norm() > tol::kUnitary)
    throw InvalidArgument("group element is not unitary");
  det_ = matrix_.determinant();
  order_ = element_order(matrix_, max_order);
  if (order_ == 0) throw InvalidArgument("group element has no finite order below the search bound");
}

GroupElement::GroupElement(Mat matrix, cplx det, std::size_t order, Trusted)
    : matrix_(std::move(matrix)), det_(det), order_(order) {}

GroupElement GroupElement::identity(int n) { return GroupElement(Mat::Identity(n, n), cplx(1.0), 1, Trusted{}); }

GroupElement GroupElement::inverse() const {
  return GroupElement(matrix_.adjoint(), std::conj(det_), order_, Trusted{});
}

bool GroupElement::approx_equal(const Mat& other, double tol) const {
  return other.rows() == matrix_.rows() && (matrix_ - other).norm() <= tol;
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) { return GroupElement(a.matrix() * b.matrix()); }

bool is_reflection(const GroupElement& g) {
  if (g.is_identity()) return false;
  const int n = g.dimension();
  Eigen::ComplexEigenSolver<Mat> solver(g.matrix(), false);
  int ones = 0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    if (std::abs(solver.eigenvalues()(i) - 1.0) < tol::kEigen) ++ones;
  }
  return ones == n - 1;
}

// ---------------------------------------------------------------------------
// Element lookup and ordering

namespace {

// Linear functional with |key(A) − key(B)| ≤ 2n·‖A − B‖_F.
double lookup_key(const Mat& m) {
  double key = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double w = 1.0 / (1.0 + static_cast<double>(i * m.cols() + j) * 0.6180339887498949);
      key += w * m(i, j).real() + 0.7548776662466927 * w * m(i, j).imag();
    }
  }
  return key;
}

double key_window(const Mat& m, double tol) { return 2.0 * static_cast<double>(m.rows()) * tol + 1e-15; }

std::optional<std::size_t> lookup(const std::multimap<double, std::size_t>& index,
                                  const std::vector<GroupElement>& elements, const Mat& m, double tol) {
  const double key = lookup_key(m);
  const double window = key_window(m, tol);
  for (auto it = index.lower_bound(key - window); it != index.end() && it->first <= key + window; ++it) {
    if (elements[it->second].approx_equal(m, tol)) return it->second;
  }
  return std::nullopt;
}

std::int64_t grid(double x) {
  const std::int64_t v = std::llround(x * 1e9);
  return v;
}

std::vector<std::int64_t> sort_key(const Mat& m) {
  std::vector<std::int64_t> key;
  key.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      key.push_back(grid(m(i, j).real()));
      key.push_back(grid(m(i, j).imag()));
    }
  }
  return key;
}

cplx root_of_unity(int k, int m) {
  const int r = ((k % m) + m) % m;
  if (r == 0) return {1.0, 0.0};
  if (2 * r == m) return {-1.0, 0.0};
  if (4 * r == m) return {0.0, 1.0};
  if (4 * r == 3 * m) return {0.0, -1.0};
  return std::polar(1.0, 2.0 * std::numbers::pi * r / m);
}

}  // namespace

std::optional<std::size_t> ReflectionGroup::find(const Mat& m, double tol) const {
  if (m.rows() != dimension_ || m.cols() != dimension_) return std::nullopt;
  return lookup(lookup_, elements_, m, tol);
}

bool ReflectionGroup::satisfies_group_axioms() const {
  if (!elements_.at(identity_).is_identity()) return false;
  for (const GroupElement& a : elements_) {
    if (!contains(a.matrix().adjoint())) return false;
    for (const GroupElement& b : elements_) {
      if (!contains(a.matrix() * b.matrix())) return false;
    }
  }
  return true;
}

namespace detail {

struct GroupAssembler {
  static ReflectionGroup assemble(std::vector<GroupElement> elements, std::span<const GroupElement> generators,
                                  std::string name, bool verify_closure) {
    if (elements.empty()) throw InvalidArgument("group must contain at least the identity");
    const int n = elements.front().dimension();
    std::vector<std::pair<std::vector<std::int64_t>, std::size_t>> keys;
    keys.reserve(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (elements[i].dimension() != n) throw InvalidArgument("group elements of mixed dimension");
      keys.emplace_back(sort_key(elements[i].matrix()), i);
    }
    std::sort(keys.begin(), keys.end());

    ReflectionGroup g;
    g.dimension_ = n;
    g.name_ = std::move(name);
    g.elements_.reserve(elements.size());
    for (const auto& [key, idx] : keys) {
      const Mat& m = elements[idx].matrix();
      if (lookup(g.lookup_, g.elements_, m, tol::kElement)) continue;
      g.lookup_.emplace(lookup_key(m), g.elements_.size());
      g.elements_.push_back(elements[idx]);
    }

    const auto id = g.find(Mat::Identity(n, n));
    if (!id) throw InvalidArgument("element list does not contain the identity");
    g.identity_ = *id;

    for (const GroupElement& gen : generators) {
      const auto idx = g.find(gen.matrix());
      if (!idx) throw InvalidArgument("generator is not an element of the group");
      if (std::find(g.generators_.begin(), g.generators_.end(), *idx) == g.generators_.end())
        g.generators_.push_back(*idx);
    }

    for (std::size_t i = 0; i < g.elements_.size(); ++i) {
      if (is_reflection(g.elements_[i])) g.reflections_.push_back(i);
    }

    if (verify_closure && !g.satisfies_group_axioms())
      throw InvalidArgument("element list is not closed under multiplication and inversion");

    // Reflections generate G exactly when their closure has |G| elements.
    std::vector<GroupElement> refl;
    for (std::size_t i : g.reflections_) refl.push_back(g.elements_[i]);
    g.generated_by_reflections_ = close_elements(refl, n, g.elements_.size()).size() == g.elements_.size();
    return g;
  }

  // Breadth-first closure under left multiplication by the generators.
  static std::vector<GroupElement> close_elements(std::span<const GroupElement> generators, int n, std::size_t cap) {
    std::vector<GroupElement> elements{GroupElement::identity(n)};
    std::multimap<double, std::size_t> index;
    index.emplace(lookup_key(elements.front().matrix()), 0);
    std::vector<GroupElement> gens;
    for (const GroupElement& gen : generators) {
      if (gen.dimension() != n) throw InvalidArgument("generators of mixed dimension");
      gens.push_back(gen);
    }
    for (std::size_t i = 0; i < elements.size(); ++i) {
      for (const GroupElement& gen : gens) {
        Mat product = gen.matrix() * elements[i].matrix();
        if (lookup(index, elements, product, tol::kElement)) continue;
        if (elements.size() >= cap)
          throw CapExceeded("closure exceeds the cap of " + std::to_string(cap) + " elements");
        index.emplace(lookup_key(product), elements.size());
        elements.emplace_back(std::move(product));
      }
    }
    return elements;
  }
};

}  // namespace detail

ReflectionGroup assemble_group(std::vector<GroupElement> elements, std::span<const GroupElement> generators,
                               std::string name, bool verify_closure) {
  return detail::GroupAssembler::assemble(std::move(elements), generators, std::move(name), verify_closure);
}

ReflectionGroup close_group(std::span<const GroupElement> generators, std::string name, std::size_t cap) {
  if (generators.empty()) throw InvalidArgument("close_group needs at least one generator");
  const int n = generators.front().dimension();
  auto elements = detail::GroupAssembler::close_elements(generators, n, cap);
  return detail::GroupAssembler::assemble(std::move(elements), generators, std::move(name), false);
}

std::vector<GroupElement> g_mln_generators(int m, int ell, int n) {
  if (m < 1 || ell < 1 || n < 1 || m % ell != 0 || n > kMaxDim)
    throw InvalidArgument("G(m,l,n) needs m, l, n ≥ 1, l | m and n ≤ 4");
  std::vector<GroupElement> gens;
  for (int i = 0; i + 1 < n; ++i) {
    Mat s = Mat::Identity(n, n);
    s(i, i) = s(i + 1, i + 1) = 0.0;
    s(i, i + 1) = s(i + 1, i) = 1.0;
    gens.emplace_back(s);
  }
  if (n >= 2 && m > 1) {
    Mat t = Mat::Identity(n, n);
    t(0, 0) = t(1, 1) = 0.0;
    t(0, 1) = root_of_unity(1, m);
    t(1, 0) = root_of_unity(-1, m);
    gens.emplace_back(t);
  }
  if (ell < m) {
    Mat d = Mat::Identity(n, n);
    d(0, 0) = root_of_unity(ell, m);
    gens.emplace_back(d);
  }
  if (gens.empty()) gens.push_back(GroupElement::identity(n));
  return gens;
}

ReflectionGroup build_g_mln(int m, int ell, int n, std::size_t cap) {
  if (m < 1 || ell < 1 || n < 1) throw InvalidArgument("G(m,l,n) needs m, l, n ≥ 1");
  if (m % ell != 0) throw InvalidArgument("l = " + std::to_string(ell) + " does not divide m = " + std::to_string(m));
  if (n > kMaxDim) throw InvalidArgument("dimension above 4 is not supported");

  long double expected = 1.0L;
  for (int i = 0; i < n; ++i) expected *= m;
  for (int i = 2; i <= n; ++i) expected *= i;
  expected /= ell;
  if (expected > static_cast<long double>(cap))
    throw CapExceeded("|G(" + std::to_string(m) + "," + std::to_string(ell) + "," + std::to_string(n) +
                      ")| exceeds the cap of " + std::to_string(cap) + " elements");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<GroupElement> elements;
  elements.reserve(static_cast<std::size_t>(expected));
  do {
    std::vector<int> nu(static_cast<std::size_t>(n), 0);
    for (;;) {
      const int total = std::accumulate(nu.begin(), nu.end(), 0);
      if (total % ell == 0) {
        Mat g = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) g(i, perm[static_cast<std::size_t>(i)]) = root_of_unity(nu[static_cast<std::size_t>(i)], m);
        elements.emplace_back(g);
      }
      int pos = 0;
      while (pos < n && ++nu[static_cast<std::size_t>(pos)] == m) nu[static_cast<std::size_t>(pos++)] = 0;
      if (pos == n) break;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const auto gens = g_mln_generators(m, ell, n);
  const std::string name = "G(" + std::to_string(m) + "," + std::to_string(ell) + "," + std::to_string(n) + ")";
  return assemble_group(std::move(elements), gens, name, false);
}

ReflectionGroup single_reflection_group(int n) {
  Mat r = Mat::Identity(n, n);
  r(0, 0) = -1.0;
  const std::vector<GroupElement> gens{GroupElement(r)};
  return close_group(gens, "<diag(-1,1)>");
}

// ---------------------------------------------------------------------------
// Hyperplanes

namespace {

// Unit vector spanning the image of g − I.
Vec reflection_root(const GroupElement& g) {
  const Mat diff = g.matrix() - Mat::Identity(g.dimension(), g.dimension());
  Eigen::Index best = 0;
  double best_norm = -1.0;
  for (Eigen::Index j = 0; j < diff.cols(); ++j) {
    const double norm = diff.col(j).norm();
    if (norm > best_norm) {
      best_norm = norm;
      best = j;
    }
  }
  return canonical_root(diff.col(best));
}

std::vector<std::int64_t> hyperplane_key(const Vec& root) {
  std::vector<std::int64_t> key;
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    const double mod = std::abs(root(i));
    double arg = 0.0;
    if (mod > 1e-9) {
      arg = std::atan2(root(i).imag(), root(i).real());
      if (arg < 0.0) arg += 2.0 * std::numbers::pi;
      if (arg > 2.0 * std::numbers::pi - 1e-9) arg = 0.0;
    }
    key.push_back(-grid(mod));
    key.push_back(grid(arg));
  }
  return key;
}

void assign_orbits(const ReflectionGroup& group, std::vector<Hyperplane>& hyperplanes) {
  const auto orbits = orbit_decomposition(group, hyperplanes);
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    for (std::size_t i : orbits[k]) hyperplanes[i].orbit_id = static_cast<int>(k);
  }
}

}  // namespace

std::optional<std::size_t> find_hyperplane(std::span<const Hyperplane> hyperplanes, const Vec& root) {
  const Vec c = canonical_root(root);
  for (std::size_t i = 0; i < hyperplanes.size(); ++i) {
    if ((hyperplanes[i].root - c).norm() <= tol::kRoot) return i;
  }
  return std::nullopt;
}

std::vector<Hyperplane> reflecting_hyperplanes(const ReflectionGroup& group) {
  std::vector<Hyperplane> found;
  for (std::size_t idx : group.reflections()) {
    const Vec root = reflection_root(group.element(idx));
    if (auto at = find_hyperplane(found, root)) {
      found[*at].fixing_reflections.push_back(idx);
    } else {
      found.push_back(Hyperplane{root, 0, {idx}, -1});
    }
  }
  for (Hyperplane& h : found) h.multiplicity = 1 + static_cast<int>(h.fixing_reflections.size());
  std::sort(found.begin(), found.end(),
            [](const Hyperplane& a, const Hyperplane& b) { return hyperplane_key(a.root) < hyperplane_key(b.root); });
  assign_orbits(group, found);
  return found;
}

std::vector<Hyperplane> find_hyperplanes(const ReflectionGroup& group) {
  if (group.reflections().empty()) throw InvalidArgument("group contains no reflections");
  return reflecting_hyperplanes(group);
}

std::vector<IndexSet> orbit_decomposition(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes) {
  std::vector<int> assigned(hyperplanes.size(), -1);
  std::vector<IndexSet> orbits;
  for (std::size_t i = 0; i < hyperplanes.size(); ++i) {
    if (assigned[i] >= 0) continue;
    IndexSet orbit;
    for (const GroupElement& g : group.elements()) {
      const auto j = find_hyperplane(hyperplanes, g.apply(hyperplanes[i].root));
      if (!j) throw IdentityCheckFailed("g.Y is not a reflecting hyperplane of the group");
      if (assigned[*j] < 0) {
        assigned[*j] = static_cast<int>(orbits.size());
        orbit.push_back(*j);
      }
    }
    std::sort(orbit.begin(), orbit.end());
    orbits.push_back(std::move(orbit));
  }
  return orbits;
}

bool is_invariant_set(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes, const IndexSet& subset) {
  for (std::size_t i : subset) {
    if (i >= hyperplanes.size()) return false;
    for (const GroupElement& g : group.elements()) {
      const auto j = find_hyperplane(hyperplanes, g.apply(hyperplanes[i].root));
      if (!j || std::find(subset.begin(), subset.end(), *j) == subset.end()) return false;
    }
  }
  return true;
}

IndexSet hyperplanes_of_orbits(const std::vector<IndexSet>& orbits, const std::vector<int>& orbit_ids) {
  IndexSet out;
  for (int id : orbit_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= orbits.size()) throw InvalidArgument("orbit id out of range");
    out.insert(out.end(), orbits[static_cast<std::size_t>(id)].begin(), orbits[static_cast<std::size_t>(id)].end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

NormalSubgroup normal_subgroup_from(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes,
                                    const IndexSet& subset) {
  if (!is_invariant_set(group, hyperplanes, subset)) throw InvalidArgument("hyperplane set is not G-invariant");

  std::vector<GroupElement> gens;
  for (std::size_t i : subset) {
    for (std::size_t r : hyperplanes[i].fixing_reflections) gens.push_back(group.element(r));
  }
  std::string name = group.name() + "_S{";
  for (std::size_t k = 0; k < subset.size(); ++k) name += (k ? "," : "") + std::to_string(subset[k]);
  name += "}";

  if (gens.empty()) gens.push_back(GroupElement::identity(group.dimension()));
  NormalSubgroup out{close_group(gens, name, group.order()), subset, false};
  IndexSet sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  out.generating_set = sorted;

  for (const GroupElement& h : out.group.elements()) {
    if (!group.contains(h.matrix())) throw IdentityCheckFailed("subgroup element outside the parent group");
  }
  for (const GroupElement& g : group.elements()) {
    for (std::size_t h : out.group.generators()) {
      const Mat conj = g.matrix() * out.group.element(h).matrix() * g.matrix().adjoint();
      if (!out.group.contains(conj)) throw IdentityCheckFailed("G_S is not normal in G");
    }
  }

  const auto own = reflecting_hyperplanes(out.group);
  bool matches = own.size() == sorted.size();
  for (const Hyperplane& y : own) {
    const auto at = find_hyperplane(hyperplanes, y.root);
    if (!at || std::find(sorted.begin(), sorted.end(), *at) == sorted.end()) matches = false;
  }
  out.reflecting_set_matches = matches;
  return out;
}

// ---------------------------------------------------------------------------
// Reduction tree

int ReductionTree::depth() const {
  int d = 0;
  for (const ReductionTree& c : children) d = std::max(d, 1 + c.depth());
  return d;
}

std::size_t ReductionTree::leaf_count() const {
  if (children.empty()) return 1;
  std::size_t total = 0;
  for (const ReductionTree& c : children) total += c.leaf_count();
  return total;
}

std::vector<const ReflectionGroup*> ReductionTree::leaves() const {
  if (children.empty()) return {&node};
  std::vector<const ReflectionGroup*> out;
  for (const ReductionTree& c : children) {
    auto sub = c.leaves();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

ReductionTree reduction_tree(const ReflectionGroup& group) {
  ReductionTree tree{group, {}, {}, true};
  const auto hyperplanes = reflecting_hyperplanes(group);
  tree.orbit_split = orbit_decomposition(group, hyperplanes);
  if (tree.orbit_split.size() <= 1) return tree;
  for (const IndexSet& orbit : tree.orbit_split) {
    NormalSubgroup sub = normal_subgroup_from(group, hyperplanes, orbit);
    tree.reflecting_sets_match = tree.reflecting_sets_match && sub.reflecting_set_matches;
    ReductionTree child = reduction_tree(sub.group);
    tree.reflecting_sets_match = tree.reflecting_sets_match && child.reflecting_sets_match;
    tree.children.push_back(std::move(child));
  }
  return tree;
}

namespace {

struct ReflectionData {
  Vec root;
  cplx eigenvalue;  // the eigenvalue ≠ 1, i.e. det
};

std::vector<ReflectionData> reflection_data(const ReflectionGroup& g) {
  std::vector<ReflectionData> out;
  for (std::size_t idx : g.reflections()) out.push_back({reflection_root(g.element(idx)), g.element(idx).det()});
  return out;
}

bool conjugates_onto(const Mat& h, const ReflectionGroup& reference, const ReflectionGroup& target) {
  for (const GroupElement& g : reference.elements()) {
    if (!target.contains(h * g.matrix() * h.adjoint())) return false;
  }
  return true;
}

}  // namespace

std::optional<Mat> conjugacy_witness(const ReflectionGroup& reference, const ReflectionGroup& target) {
  const int n = reference.dimension();
  if (target.dimension() != n || target.order() != reference.order()) return std::nullopt;
  if (reference.order() == 1) return Mat::Identity(n, n);

  const auto ref = reflection_data(reference);
  const auto tgt = reflection_data(target);
  if (ref.empty() || tgt.size() != ref.size()) return std::nullopt;

  const ReflectionData& r0 = ref.front();
  std::vector<const ReflectionData*> partners{nullptr};
  for (const ReflectionData& r : ref) {
    if (std::abs(std::abs(inner(r.root, r0.root)) - 1.0) > 1e-7) partners.push_back(&r);
  }

  for (const ReflectionData* r1 : partners) {
    for (const ReflectionData& s0 : tgt) {
      if (std::abs(s0.eigenvalue - r0.eigenvalue) > tol::kEigen) continue;
      if (!r1) {
        const Mat h = complete_unitary({s0.root}, n) * complete_unitary({r0.root}, n).adjoint();
        if (conjugates_onto(h, reference, target)) return h;
        continue;
      }
      const cplx ref_gram = inner(r0.root, r1->root);
      for (const ReflectionData& s1 : tgt) {
        if (std::abs(s1.eigenvalue - r1->eigenvalue) > tol::kEigen) continue;
        const cplx tgt_gram = inner(s0.root, s1.root);
        if (std::abs(std::abs(tgt_gram) - std::abs(ref_gram)) > 1e-9) continue;
        if (std::abs(std::abs(tgt_gram) - 1.0) <= 1e-7) continue;
        // Choose c with ⟨s0, c·s1⟩ = ⟨r0, r1⟩ so the two Gram matrices agree.
        const cplx c = std::abs(tgt_gram) > 1e-12 ? std::conj(ref_gram / tgt_gram) : cplx(1.0);
        const Mat h = complete_unitary({s0.root, c * s1.root}, n) *
                      complete_unitary({r0.root, r1->root}, n).adjoint();
        if (conjugates_onto(h, reference, target)) return h;
      }
    }
  }
  return std::nullopt;
}

}  // namespace bergcov
