#include <doctest.h>

#include <cmath>
#include <numbers>
#include <functional>
#include <set>

#include "bergcov/reflection_group.hpp"

using namespace bergcov;

namespace {

cplx root_of_unity(int m, int k) { return std::polar(1.0, 2.0 * std::numbers::pi * k / m); }

// Plain BFS over products with the generators, no canonical ordering or lookup table.
std::vector<Mat> naive_closure(const std::vector<Mat>& gens) {
  std::vector<Mat> found{Mat::Identity(gens.front().rows(), gens.front().cols())};
  for (std::size_t head = 0; head < found.size(); ++head) {
    for (const Mat& g : gens) {
      const Mat candidate = g * found[head];
      bool seen = false;
      for (const Mat& f : found) seen = seen || (f - candidate).norm() < 1e-8;
      if (!seen) found.push_back(candidate);
    }
  }
  return found;
}

Mat twisted_swap(cplx theta) {
  Mat r(2, 2);
  r << 0.0, theta, 1.0 / theta, 0.0;
  return r;
}

std::vector<Mat> independent_generators(int m, int ell) {
  std::vector<Mat> gens{twisted_swap(1.0), twisted_swap(root_of_unity(m, 1))};
  if (ell < m) {
    Mat d = Mat::Identity(2, 2);
    d(0, 0) = root_of_unity(m, ell);
    gens.push_back(d);
  }
  return gens;
}

bool same_sets(const ReflectionGroup& g, const std::vector<Mat>& mats) {
  if (g.order() != mats.size()) return false;
  for (const Mat& m : mats)
    if (!g.contains(m)) return false;
  return true;
}

std::size_t factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("G(m,l,n) orders of the dihedral, symmetric and cyclic members") {
  CHECK(build_g_mln(2, 2, 2).order() == 4);
  CHECK(build_g_mln(1, 1, 2).order() == 2);
  CHECK(build_g_mln(4, 1, 1).order() == 4);
  CHECK(build_g_mln(2, 1, 2).order() == 8);
}

TEST_CASE("enumeration agrees with brute-force closure") {
  for (auto [m, ell] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {2, 1}, {3, 3}, {4, 4}, {4, 2}, {4, 1}, {6, 3}, {8, 8}}) {
    CAPTURE(m);
    CAPTURE(ell);
    const ReflectionGroup g = build_g_mln(m, ell, 2);
    const auto mats = naive_closure(independent_generators(m, ell));
    CHECK(mats.size() == static_cast<std::size_t>(2 * m * m / ell));
    CHECK(same_sets(g, mats));
    CHECK(g.satisfies_group_axioms());
    CHECK(g.generated_by_reflections());
  }
}

TEST_CASE("order formula m^n n!/l in other dimensions") {
  for (auto [m, ell, n] : std::vector<std::array<int, 3>>{{2, 1, 3}, {2, 2, 3}, {3, 3, 3}, {1, 1, 4}, {5, 5, 1}}) {
    std::size_t expected = factorial(n);
    for (int i = 0; i < n; ++i) expected *= m;
    CHECK(build_g_mln(m, ell, n).order() == expected / ell);
  }
}

TEST_CASE("close_group examples") {
  const GroupElement id = GroupElement::identity(2);
  CHECK(close_group(std::vector<GroupElement>{id}).order() == 1);

  std::vector<GroupElement> r_theta;
  for (int k = 0; k < 3; ++k) r_theta.emplace_back(twisted_swap(root_of_unity(3, k)));
  const ReflectionGroup g332 = close_group(r_theta);
  CHECK(g332.order() == 6);
  std::vector<Mat> mats;
  for (const GroupElement& e : build_g_mln(3, 3, 2).elements()) mats.push_back(e.matrix());
  CHECK(same_sets(g332, mats));

  Mat r = Mat::Identity(2, 2);
  r(0, 0) = -1.0;
  const ReflectionGroup two = close_group(std::vector<GroupElement>{GroupElement(r)});
  CHECK(two.order() == 2);
  CHECK(two.reflections().size() == 1);
}

TEST_CASE("element ordering is deterministic") {
  const ReflectionGroup a = build_g_mln(4, 2, 2);
  const ReflectionGroup b = close_group(g_mln_generators(4, 2, 2));
  REQUIRE(a.order() == b.order());
  for (std::size_t i = 0; i < a.order(); ++i) CHECK(a.element(i).approx_equal(b.element(i).matrix()));
}

TEST_CASE("closure cap and invalid parameters") {
  CHECK_THROWS_AS(build_g_mln(5, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(build_g_mln(0, 1, 2), InvalidArgument);
  CHECK_THROWS_AS(build_g_mln(8, 1, 3, 1000), CapExceeded);
  Mat irrational(2, 2);
  irrational << std::polar(1.0, 1.0), 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(GroupElement{irrational}, InvalidArgument);
  Mat not_unitary = Mat::Identity(2, 2);
  not_unitary(0, 1) = 0.5;
  CHECK_THROWS_AS(GroupElement{not_unitary}, InvalidArgument);
}

TEST_CASE("element invariants hold for every element") {
  for (auto [m, ell] : std::vector<std::pair<int, int>>{{4, 4}, {6, 2}, {8, 8}}) {
    const ReflectionGroup g = build_g_mln(m, ell, 2);
    for (const GroupElement& e : g.elements()) {
      const Mat& mt = e.matrix();
      CHECK((mt * mt.adjoint() - Mat::Identity(2, 2)).norm() <= 1e-9);
      CHECK(std::abs(std::abs(e.det()) - 1.0) <= 1e-9);
      Mat power = Mat::Identity(2, 2);
      std::size_t k = 0;
      do {
        power = power * mt;
        ++k;
      } while ((power - Mat::Identity(2, 2)).norm() > 1e-9);
      CHECK(k == e.order());
    }
  }
}

TEST_CASE("hyperplanes of G(m,m,2): m of them, multiplicity 2") {
  for (int m : {1, 2, 3, 4, 5, 6, 8}) {
    CAPTURE(m);
    const ReflectionGroup g = build_g_mln(m, m, 2);
    const auto hs = find_hyperplanes(g);
    CHECK(hs.size() == static_cast<std::size_t>(m));
    CHECK(g.reflections().size() == static_cast<std::size_t>(m));
    for (const Hyperplane& h : hs) {
      CHECK(h.multiplicity == 2);
      CHECK(std::abs(h.root.norm() - 1.0) <= 1e-12);
      CHECK(h.fixing_reflections.size() == 1);
    }
    const auto orbits = orbit_decomposition(g, hs);
    CHECK(orbits.size() == (m % 2 == 0 ? 2u : 1u));
  }
}

TEST_CASE("hyperplane multiplicities match fixing reflections") {
  for (auto [m, ell] : std::vector<std::pair<int, int>>{{4, 2}, {4, 1}, {6, 2}, {6, 1}, {3, 1}}) {
    CAPTURE(m);
    CAPTURE(ell);
    const ReflectionGroup g = build_g_mln(m, ell, 2);
    const auto hs = find_hyperplanes(g);
    // m anti-diagonal mirrors plus the two coordinate axes
    CHECK(hs.size() == static_cast<std::size_t>(m + 2));
    for (const Hyperplane& h : hs) {
      CHECK(h.multiplicity == static_cast<int>(h.fixing_reflections.size()) + 1);
      const bool axis = std::abs(h.root(0)) < 1e-9 || std::abs(h.root(1)) < 1e-9;
      CHECK(h.multiplicity == (axis ? m / ell : 2));
      for (std::size_t r : h.fixing_reflections) CHECK(std::abs(inner(g.element(r).apply(h.root), h.root)) > 1e-9);
    }
  }
}

TEST_CASE("roots are canonical") {
  for (const Hyperplane& h : find_hyperplanes(build_g_mln(6, 3, 2))) {
    const int first = std::abs(h.root(0)) > 1e-8 ? 0 : 1;
    CHECK(std::abs(h.root(first).imag()) <= 1e-12);
    CHECK(h.root(first).real() > 0.0);
    CHECK(find_hyperplane(find_hyperplanes(build_g_mln(6, 3, 2)), h.root * std::polar(1.0, 0.7)).has_value());
  }
}

TEST_CASE("find_hyperplanes rejects a group without reflections") {
  Mat minus = -Mat::Identity(2, 2);
  const ReflectionGroup g = close_group(std::vector<GroupElement>{GroupElement(minus)});
  CHECK(reflecting_hyperplanes(g).empty());
  CHECK_THROWS_AS(find_hyperplanes(g), InvalidArgument);
}

TEST_CASE("orbits are invariant and partition the hyperplanes") {
  const ReflectionGroup g = build_g_mln(4, 2, 2);
  const auto hs = find_hyperplanes(g);
  const auto orbits = orbit_decomposition(g, hs);
  CHECK(orbits.size() == 3);
  std::set<std::size_t> all;
  for (const IndexSet& o : orbits) {
    CHECK(is_invariant_set(g, hs, o));
    for (std::size_t y : o) {
      CHECK(all.insert(y).second);
      CHECK(hs[y].orbit_id == static_cast<int>(&o - orbits.data()));
    }
  }
  CHECK(all.size() == hs.size());
  CHECK_FALSE(is_invariant_set(g, hs, IndexSet{orbits[1].front()}));
}

TEST_CASE("normal subgroups G_S") {
  const ReflectionGroup g = build_g_mln(4, 4, 2);
  const auto hs = find_hyperplanes(g);
  const auto orbits = orbit_decomposition(g, hs);
  REQUIRE(orbits.size() == 2);
  for (const IndexSet& s : orbits) {
    const NormalSubgroup h = normal_subgroup_from(g, hs, s);
    CHECK(h.group.order() == 4);
    CHECK(h.reflecting_set_matches);
    for (const GroupElement& x : h.group.elements()) CHECK(g.contains(x.matrix()));
    for (const GroupElement& a : g.elements())
      for (const GroupElement& x : h.group.elements())
        CHECK(h.group.contains((a * x * a.inverse()).matrix()));
  }
  CHECK_THROWS_AS(normal_subgroup_from(g, hs, IndexSet{0}), InvalidArgument);
}

TEST_CASE("reduction tree of G(8,8,2) has 8 conjugate leaves") {
  const ReductionTree t = reduction_tree(build_g_mln(8, 8, 2));
  CHECK(t.depth() == 3);
  CHECK(t.leaf_count() == 8);
  CHECK(t.reflecting_sets_match);
  const auto leaves = t.leaves();
  for (const ReflectionGroup* leaf : leaves) {
    CHECK(leaf->order() == 2);
    const auto h = conjugacy_witness(*leaves.front(), *leaf);
    REQUIRE(h.has_value());
    CHECK((*h * h->adjoint() - Mat::Identity(2, 2)).norm() <= 1e-9);
    for (const GroupElement& x : leaves.front()->elements())
      CHECK(leaf->contains(*h * x.matrix() * h->adjoint()));
  }
}

TEST_CASE("reduction tree shapes") {
  CHECK(reduction_tree(build_g_mln(2, 2, 2)).leaf_count() == 2);
  const ReductionTree odd = reduction_tree(build_g_mln(3, 3, 2));
  CHECK(odd.children.empty());
  CHECK(odd.leaf_count() == 1);
  CHECK(odd.depth() == 0);
  const ReductionTree t4 = reduction_tree(build_g_mln(4, 4, 2));
  CHECK(t4.leaf_count() == 4);
  CHECK(t4.depth() == 2);
}

TEST_CASE("tree children are subsets of their parent") {
  std::function<void(const ReductionTree&)> walk = [&](const ReductionTree& t) {
    if (t.orbit_split.size() > 1) CHECK(t.children.size() == t.orbit_split.size());
    else CHECK(t.children.empty());
    for (const ReductionTree& c : t.children) {
      for (std::size_t r : c.node.reflections()) CHECK(t.node.contains(c.node.element(r).matrix()));
      walk(c);
    }
  };
  walk(reduction_tree(build_g_mln(8, 8, 2)));
  walk(reduction_tree(build_g_mln(6, 6, 2)));
}

TEST_CASE("conjugacy witness fails for non-conjugate groups") {
  Mat r = Mat::Identity(2, 2);
  r(0, 0) = -1.0;
  Mat s = Mat::Identity(2, 2);
  s(0, 0) = root_of_unity(3, 1);
  const ReflectionGroup a = close_group(std::vector<GroupElement>{GroupElement(r)});
  const ReflectionGroup b = close_group(std::vector<GroupElement>{GroupElement(s)});
  CHECK_FALSE(conjugacy_witness(a, b).has_value());
}
