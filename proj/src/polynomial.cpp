#include "bergcov/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bergcov {

Polynomial::Polynomial(int dimension) : dimension_(dimension) {
  if (dimension < 1 || dimension > kMaxDim) throw InvalidArgument("polynomial dimension must be in [1, 4]");
}

Polynomial Polynomial::constant(int dimension, cplx c) {
  Polynomial p(dimension);
  p.add_term(Exponent(static_cast<std::size_t>(dimension), 0), c);
  return p;
}

Polynomial Polynomial::variable(int dimension, int index) {
  if (index < 0 || index >= dimension) throw InvalidArgument("variable index out of range");
  Exponent e(static_cast<std::size_t>(dimension), 0);
  e[static_cast<std::size_t>(index)] = 1;
  return monomial(std::move(e));
}

Polynomial Polynomial::monomial(Exponent exponent, cplx coefficient) {
  Polynomial p(static_cast<int>(exponent.size()));
  p.add_term(exponent, coefficient);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

cplx Polynomial::coefficient(const Exponent& exponent) const {
  const auto it = terms_.find(exponent);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

void Polynomial::add_term(const Exponent& exponent, cplx coefficient) {
  if (static_cast<int>(exponent.size()) != dimension_) throw InvalidArgument("exponent length mismatch");
  if (std::any_of(exponent.begin(), exponent.end(), [](int k) { return k < 0; }))
    throw InvalidArgument("negative exponent");
  if (coefficient == cplx(0.0)) return;
  auto [it, inserted] = terms_.emplace(exponent, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

cplx Polynomial::operator()(const Vec& z) const {
  if (z.size() != dimension_) throw InvalidArgument("evaluation point has the wrong dimension");
  cplx sum = 0.0;
  for (const auto& [e, c] : terms_) {
    cplx term = c;
    for (int i = 0; i < dimension_; ++i) {
      const int k = e[static_cast<std::size_t>(i)];
      if (k == 0) continue;
      term *= ipow(z(i), k);
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::derivative(int variable) const {
  if (variable < 0 || variable >= dimension_) throw InvalidArgument("variable index out of range");
  Polynomial d(dimension_);
  for (const auto& [e, c] : terms_) {
    const int k = e[static_cast<std::size_t>(variable)];
    if (k == 0) continue;
    Exponent lowered = e;
    --lowered[static_cast<std::size_t>(variable)];
    d.add_term(lowered, c * static_cast<double>(k));
  }
  return d;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw InvalidArgument("negative power");
  Polynomial result = constant(dimension_, 1.0);
  Polynomial base = *this;
  for (; k; k >>= 1) {
    if (k & 1) result = result * base;
    if (k > 1) base = base * base;
  }
  return result;
}

double Polynomial::ball_norm_squared() const {
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    // π^n α! / (n + |α|)!, accumulated in logs.
    double log_value = dimension_ * std::log(std::numbers::pi);
    int abs_alpha = 0;
    for (int k : e) {
      log_value += std::lgamma(k + 1.0);
      abs_alpha += k;
    }
    log_value -= std::lgamma(dimension_ + abs_alpha + 1.0);
    total += std::norm(c) * std::exp(log_value);
  }
  return total;
}

double Polynomial::ball_sup_bound() const {
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    const int abs_alpha = std::accumulate(e.begin(), e.end(), 0);
    double sup = 1.0;
    // max of ∏|z_i|^{α_i} on the unit sphere is ∏ (α_i/|α|)^{α_i/2}
    for (int k : e) {
      if (k > 0) sup *= std::pow(static_cast<double>(k) / abs_alpha, 0.5 * k);
    }
    total += std::abs(c) * sup;
  }
  return total;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.dimension_ != dimension_) throw InvalidArgument("polynomial dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.dimension_ != dimension_) throw InvalidArgument("polynomial dimension mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(cplx c) {
  if (c == cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, coeff] : terms_) coeff *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dimension_ != b.dimension_) throw InvalidArgument("polynomial dimension mismatch");
  Polynomial out(a.dimension_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Exponent e = ea;
      for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

bool Polynomial::approx_equal(const Polynomial& other, double tol) const {
  if (other.dimension_ != dimension_) return false;
  Polynomial diff = *this - other;
  return std::all_of(diff.terms_.begin(), diff.terms_.end(),
                     [tol](const auto& term) { return std::abs(term.second) <= tol; });
}

std::vector<cplx> restrict_to_line(const Polynomial& p, const Vec& base, const Vec& direction) {
  const int n = p.dimension();
  if (base.size() != n || direction.size() != n) throw InvalidArgument("line has the wrong dimension");
  std::vector<cplx> out(static_cast<std::size_t>(std::max(p.degree(), 0)) + 1, 0.0);
  for (const auto& [e, c] : p.terms()) {
    std::vector<cplx> acc{c};
    for (int i = 0; i < n; ++i) {
      const int k = e[static_cast<std::size_t>(i)];
      // (base_i + t·direction_i)^k
      std::vector<cplx> factor(static_cast<std::size_t>(k) + 1);
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        factor[static_cast<std::size_t>(j)] = binom * ipow(base(i), k - j) * ipow(direction(i), j);
        binom = binom * (k - j) / (j + 1);
      }
      std::vector<cplx> next(acc.size() + factor.size() - 1, 0.0);
      for (std::size_t a = 0; a < acc.size(); ++a)
        for (std::size_t b = 0; b < factor.size(); ++b) next[a + b] += acc[a] * factor[b];
      acc = std::move(next);
    }
    for (std::size_t j = 0; j < acc.size(); ++j) out[j] += acc[j];
  }
  return out;
}

Polynomial jacobian_determinant(const std::vector<Polynomial>& components) {
  const int n = static_cast<int>(components.size());
  if (n < 1) throw InvalidArgument("jacobian of an empty map");
  for (const Polynomial& p : components) {
    if (p.dimension() != n) throw InvalidArgument("orbit map must have as many components as variables");
  }
  std::vector<std::vector<Polynomial>> partial(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) partial[static_cast<std::size_t>(i)].push_back(components[static_cast<std::size_t>(i)].derivative(j));
  }
  // Leibniz expansion over permutations.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Polynomial det(n);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inversions;
    Polynomial term = Polynomial::constant(n, inversions % 2 ? -1.0 : 1.0);
    for (int i = 0; i < n; ++i) term = term * partial[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    det += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

}  // namespace bergcov
