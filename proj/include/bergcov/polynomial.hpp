#pragma once

#include <map>
#include <vector>

#include "bergcov/linalg.hpp"

namespace bergcov {

using Exponent = std::vector<int>;

/// Sparse polynomial in n complex variables, keyed by exponent multi-index.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  explicit Polynomial(int dimension = 2);

  static Polynomial constant(int dimension, cplx c);
  static Polynomial variable(int dimension, int index);
  static Polynomial monomial(Exponent exponent, cplx coefficient = 1.0);

  int dimension() const { return dimension_; }
  const std::map<Exponent, cplx>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; −1 for the zero polynomial.
  int degree() const;
  cplx coefficient(const Exponent& exponent) const;

  void add_term(const Exponent& exponent, cplx coefficient);

  cplx operator()(const Vec& z) const;
  Polynomial derivative(int variable) const;
  Polynomial pow(int k) const;

  /// Exact ∫_{B_n} |p|² dV, using orthogonality of monomials on the ball:
  /// ∫ |z^α|² = π^n α! / (n + |α|)!.
  double ball_norm_squared() const;
  /// Σ |c_α| · sup_{‖z‖≤1} |z^α|, an upper bound for sup over the closed ball.
  double ball_sup_bound() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(cplx c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, cplx c) { return a *= c; }
  friend Polynomial operator*(cplx c, Polynomial a) { return a *= c; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

  /// Coefficientwise comparison within an absolute tolerance.
  bool approx_equal(const Polynomial& other, double tol = 1e-12) const;

 private:
  int dimension_;
  std::map<Exponent, cplx> terms_;
};

/// Coefficients c_j of t ↦ p(base + t·direction) = Σ_j c_j t^j, from the binomial
/// expansion of every monomial.
std::vector<cplx> restrict_to_line(const Polynomial& p, const Vec& base, const Vec& direction);

/// Determinant of the matrix of partial derivatives ∂P_i/∂z_j, expanded symbolically.
Polynomial jacobian_determinant(const std::vector<Polynomial>& components);

}  // namespace bergcov
