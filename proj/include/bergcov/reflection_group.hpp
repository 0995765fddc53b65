#pragma once

// Finite unitary reflection groups: construction by closure, reflecting
// hyperplanes with multiplicities, G-orbits of hyperplanes, the normal
// reflection subgroups G_S, and the recursive reduction tree.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bergcov/linalg.hpp"

namespace bergcov {

inline constexpr std::size_t kDefaultClosureCap = 10000;

/// Unitary matrix of finite order with cached determinant and order.
class GroupElement {
 public:
  /// Throws InvalidArgument if `matrix` is not square, not unitary, or has no
  /// finite order up to `max_order`.
  explicit GroupElement(Mat matrix, std::size_t max_order = 100000);

  static GroupElement identity(int n);

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  const Mat& matrix() const { return matrix_; }
  cplx det() const { return det_; }
  std::size_t order() const { return order_; }

  Vec apply(const Vec& z) const { return matrix_ * z; }
  GroupElement inverse() const;
  bool approx_equal(const Mat& other, double tol = tol::kElement) const;
  bool is_identity() const { return order_ == 1; }

 private:
  struct Trusted {};
  GroupElement(Mat matrix, cplx det, std::size_t order, Trusted);

  Mat matrix_;
  cplx det_;
  std::size_t order_;
};

GroupElement operator*(const GroupElement& a, const GroupElement& b);

class ReflectionGroup;

namespace detail {
struct GroupAssembler;
}

/// A finite subgroup of U(n), stored as its deduplicated element list in a
/// deterministic (lexicographic) order.
class ReflectionGroup {
 public:
  int dimension() const { return dimension_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<GroupElement>& elements() const { return elements_; }
  const GroupElement& element(std::size_t i) const { return elements_.at(i); }
  const std::vector<std::size_t>& generators() const { return generators_; }
  /// Indices of the elements that are reflections.
  const std::vector<std::size_t>& reflections() const { return reflections_; }
  const std::string& name() const { return name_; }
  std::size_t identity_index() const { return identity_; }

  /// Index of the element within Frobenius distance tol of `m`, if any.
  std::optional<std::size_t> find(const Mat& m, double tol = tol::kElement) const;
  bool contains(const Mat& m) const { return find(m).has_value(); }

  /// True when the reflections alone generate the whole group.
  bool generated_by_reflections() const { return generated_by_reflections_; }

  /// Verifies closure, identity and inverses elementwise.
  bool satisfies_group_axioms() const;

 private:
  friend struct detail::GroupAssembler;

  int dimension_ = 0;
  std::vector<GroupElement> elements_;
  std::vector<std::size_t> generators_;
  std::vector<std::size_t> reflections_;
  std::string name_;
  std::size_t identity_ = 0;
  bool generated_by_reflections_ = false;
  std::multimap<double, std::size_t> lookup_;
};

/// True for a non-identity element whose eigenvalue-1 eigenspace has dimension n − 1.
bool is_reflection(const GroupElement& g);

/// Smallest multiplicatively closed set containing the generators.
/// Throws CapExceeded when more than `cap` elements are produced.
ReflectionGroup close_group(std::span<const GroupElement> generators, std::string name = {},
                            std::size_t cap = kDefaultClosureCap);

/// Builds a group from an already closed element list. Closure is verified
/// elementwise when `verify_closure` is set (O(|G|²) lookups).
ReflectionGroup assemble_group(std::vector<GroupElement> elements, std::span<const GroupElement> generators,
                               std::string name = {}, bool verify_closure = true);

/// Reflection generators of G(m, ℓ, n): the transpositions, the twisted swap
/// (z1, z2) ↦ (θz2, θ⁻¹z1) and diag(θ^ℓ, 1, …) when ℓ < m.
std::vector<GroupElement> g_mln_generators(int m, int ell, int n);

/// G(m, ℓ, n) enumerated as permutation matrices times diagonal m-th roots of
/// unity whose exponent sum is divisible by ℓ.
ReflectionGroup build_g_mln(int m, int ell, int n, std::size_t cap = kDefaultClosureCap);

/// The order-2 group {id, diag(−1, 1, …, 1)}.
ReflectionGroup single_reflection_group(int n = 2);

struct Hyperplane {
  Vec root;  ///< canonical unit normal e_Y
  int multiplicity = 0;  ///< m_Y = |G_Y|
  std::vector<std::size_t> fixing_reflections;
  int orbit_id = -1;
};

/// Reflecting hyperplanes with multiplicities and orbit ids; empty when the
/// group has no reflections.
std::vector<Hyperplane> reflecting_hyperplanes(const ReflectionGroup& group);

/// As reflecting_hyperplanes, but throws InvalidArgument for a group without reflections.
std::vector<Hyperplane> find_hyperplanes(const ReflectionGroup& group);

/// Index of the hyperplane whose canonical root matches `root` (any unit multiple).
std::optional<std::size_t> find_hyperplane(std::span<const Hyperplane> hyperplanes, const Vec& root);

/// Partition of hyperplane indices into G-orbits under Y ↦ g.Y, ordered by smallest member.
std::vector<IndexSet> orbit_decomposition(const ReflectionGroup& group,
                                          std::span<const Hyperplane> hyperplanes);

/// True if g.Y ∈ S for every g ∈ G and Y ∈ S.
bool is_invariant_set(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes,
                      const IndexSet& subset);

/// Union of the hyperplane indices of the listed orbits.
IndexSet hyperplanes_of_orbits(const std::vector<IndexSet>& orbits, const std::vector<int>& orbit_ids);

struct NormalSubgroup {
  ReflectionGroup group;
  IndexSet generating_set;  ///< S, as indices into the parent's hyperplanes
  /// R_{G_S} = S: the subgroup has no reflecting hyperplanes outside S.
  bool reflecting_set_matches = false;
};

/// G_S, the subgroup generated by the reflections fixing some Y ∈ S.
/// Throws InvalidArgument if S is not G-invariant and IdentityCheckFailed if the
/// result is not normal.
NormalSubgroup normal_subgroup_from(const ReflectionGroup& group, std::span<const Hyperplane> hyperplanes,
                                    const IndexSet& subset);

struct ReductionTree {
  ReflectionGroup node;
  std::vector<IndexSet> orbit_split;  ///< hyperplane orbits of `node`
  std::vector<ReductionTree> children;
  bool reflecting_sets_match = true;  ///< R_{G_S} = S held at every split below

  int depth() const;
  std::size_t leaf_count() const;
  std::vector<const ReflectionGroup*> leaves() const;
};

ReductionTree reduction_tree(const ReflectionGroup& group);

/// Searches for a unitary h with target = h · reference · h⁻¹ (as sets). The
/// candidates map a pair of generating reflections of the reference onto pairs
/// of reflections of the target with matching eigenvalues and root angles.
std::optional<Mat> conjugacy_witness(const ReflectionGroup& reference, const ReflectionGroup& target);

}  // namespace bergcov
