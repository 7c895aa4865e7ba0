#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace pshkit {

using complex = std::complex<double>;

/// Components of a (1,0) vector ξ1 ∂/∂z1 + ξ2 ∂/∂z2.
struct ComplexVector2 {
  complex v1{};
  complex v2{};

  double norm2() const { return std::norm(v1) + std::norm(v2); }
  double norm() const { return std::sqrt(norm2()); }
  /// Hermitian inner product ⟨u, w⟩ = Σ u_j conj(w_j).
  complex dot(const ComplexVector2& w) const { return v1 * std::conj(w.v1) + v2 * std::conj(w.v2); }
  /// Euclidean inner product on R^4 = C^2.
  double real_dot(const ComplexVector2& w) const { return dot(w).real(); }

  friend ComplexVector2 operator+(const ComplexVector2& a, const ComplexVector2& b) {
    return {a.v1 + b.v1, a.v2 + b.v2};
  }
  friend ComplexVector2 operator-(const ComplexVector2& a, const ComplexVector2& b) {
    return {a.v1 - b.v1, a.v2 - b.v2};
  }
  friend ComplexVector2 operator*(complex s, const ComplexVector2& a) { return {s * a.v1, s * a.v2}; }
  friend ComplexVector2 operator*(double s, const ComplexVector2& a) { return {s * a.v1, s * a.v2}; }
};

/// A (1,0) form, e.g. ∂f = f_{z1} dz1 + f_{z2} dz2.
struct ComplexCovector2 {
  complex c1{};
  complex c2{};

  double norm() const { return std::sqrt(std::norm(c1) + std::norm(c2)); }
  /// Contraction ⟨∂f, ξ⟩ = Σ f_{z_j} ξ_j.
  complex apply(const ComplexVector2& xi) const { return c1 * xi.v1 + c2 * xi.v2; }
};

/// 2x2 Hermitian form h(X, Y) = Σ h_{jk̄} X_j conj(Y_k).
class HermitianForm2 {
 public:
  HermitianForm2() = default;
  HermitianForm2(complex h11, complex h12, complex h21, complex h22) : h_{h11, h12, h21, h22} {}

  static HermitianForm2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  /// Rank-one form ξ ↦ |⟨c, ξ⟩|².
  static HermitianForm2 outer(const ComplexCovector2& c) {
    return {c.c1 * std::conj(c.c1), c.c1 * std::conj(c.c2), c.c2 * std::conj(c.c1), c.c2 * std::conj(c.c2)};
  }

  /// Entry h_{jk̄}, j and k in {1, 2}.
  complex operator()(int j, int k) const { return h_[(j - 1) * 2 + (k - 1)]; }

  complex apply(const ComplexVector2& x, const ComplexVector2& y) const {
    return h_[0] * x.v1 * std::conj(y.v1) + h_[1] * x.v1 * std::conj(y.v2) + h_[2] * x.v2 * std::conj(y.v1) +
           h_[3] * x.v2 * std::conj(y.v2);
  }

  double frobenius_norm() const {
    return std::sqrt(std::norm(h_[0]) + std::norm(h_[1]) + std::norm(h_[2]) + std::norm(h_[3]));
  }
  /// max |h_{jk̄} - conj(h_{kj̄})|
  double hermitian_defect() const {
    return std::max({std::abs(h_[0] - std::conj(h_[0])), std::abs(h_[3] - std::conj(h_[3])),
                     std::abs(h_[1] - std::conj(h_[2]))});
  }

  // Eigenvalues of the Hermitian part, closed form from trace and determinant.
  double min_eigenvalue() const { return mean() - radius(); }
  double max_eigenvalue() const { return mean() + radius(); }

  /// max(1, ‖h‖_F), used to make tolerances dimensionless.
  double scale() const { return std::max(1.0, frobenius_norm()); }

  friend HermitianForm2 operator+(const HermitianForm2& a, const HermitianForm2& b) {
    return {a.h_[0] + b.h_[0], a.h_[1] + b.h_[1], a.h_[2] + b.h_[2], a.h_[3] + b.h_[3]};
  }
  friend HermitianForm2 operator-(const HermitianForm2& a, const HermitianForm2& b) {
    return {a.h_[0] - b.h_[0], a.h_[1] - b.h_[1], a.h_[2] - b.h_[2], a.h_[3] - b.h_[3]};
  }
  friend HermitianForm2 operator*(double s, const HermitianForm2& a) {
    return {s * a.h_[0], s * a.h_[1], s * a.h_[2], s * a.h_[3]};
  }

 private:
  double mean() const { return 0.5 * (h_[0].real() + h_[3].real()); }
  double radius() const {
    const complex off = 0.5 * (h_[1] + std::conj(h_[2]));
    return std::hypot(0.5 * (h_[0].real() - h_[3].real()), std::abs(off));
  }

  std::array<complex, 4> h_{};
};

}  // namespace pshkit
