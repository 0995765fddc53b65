#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bergcov {

using cplx = std::complex<double>;

/// Largest ambient dimension supported. Vectors and matrices live on the stack.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using IndexSet = std::vector<std::size_t>;

namespace tol {
inline constexpr double kUnitary = 1e-9;   // ‖MM* − I‖_F
inline constexpr double kElement = 1e-9;   // Frobenius distance for element equality
inline constexpr double kEigen = 1e-7;     // |λ − 1| for the fixed eigenspace
inline constexpr double kRoot = 1e-7;      // distance between canonical roots
inline constexpr double kRootNorm = 1e-12;
}  // namespace tol

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or malformed parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Group closure grew past the configured element cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at a numerically singular point.
class SingularInput : public Error {
 public:
  using Error::Error;
};

/// A deterministic identity that must hold exactly (up to rounding) failed.
class IdentityCheckFailed : public Error {
 public:
  using Error::Error;
};

/// Hermitian product ⟨a, b⟩ = Σ a_i conj(b_i).
inline cplx inner(const Vec& a, const Vec& b) { return b.dot(a); }

/// Integer power by repeated squaring; ipow(0, 0) = 1.
inline cplx ipow(cplx base, int k) {
  cplx result = 1.0;
  for (; k > 0; k >>= 1) {
    if (k & 1) result *= base;
    base *= base;
  }
  return result;
}

inline Vec make_vec(std::initializer_list<cplx> entries) {
  Vec v(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (const cplx& c : entries) v(i++) = c;
  return v;
}

/// Scales v to unit norm and rotates its phase so the first coordinate with
/// modulus above `zero_tol` is real positive.
Vec canonical_root(const Vec& v, double zero_tol = 1e-8);

/// Unitary whose first k columns are the Gram-Schmidt orthonormalization of
/// `leading` (assumed linearly independent), completed to a basis of C^n.
Mat complete_unitary(const std::vector<Vec>& leading, int n);

}  // namespace bergcov
