#pragma once

// Geometry of bΩ = {ρ = 0} derived from a real defining function ρ on C^2:
// gradient, the frame L, N, complex Hessians (Levi forms), the normal
// projection onto bΩ, weak/strict classification and the obstruction
// N H_ρ(L,L).
//
//   L = (ρ_{z2} ∂1 - ρ_{z1} ∂2) / |∂ρ|,   N = (ρ_{z̄1} ∂1 + ρ_{z̄2} ∂2) / |∂ρ|
//
// Quantities quadratic in the frame (H_ρ(L,L), H_ρ(N,L)) are assembled from
// the unnormalized numerators over |∂ρ|², so they carry no sqrt.

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "pshkit/eval.hpp"
#include "pshkit/expr.hpp"
#include "pshkit/hermitian.hpp"

namespace pshkit {

struct FrameFields {
  VectorField2 L;
  VectorField2 N;
};

/// Symbolic frame of ρ (components contain sqrt(|∂ρ|²)).
FrameFields frame(const ScalarField& rho);

/// Symbolic H_f(X, Y) = Σ f_{z_j z̄_k} X_j conj(Y_k).
ScalarField levi_field(const ScalarField& f, const VectorField2& X, const VectorField2& Y);

/// Value, (1,0) gradient and complex Hessian of one field, compiled once.
class HessianJet {
 public:
  struct Value {
    complex value;
    ComplexCovector2 grad;
    HermitianForm2 levi;
  };

  explicit HessianJet(const ScalarField& f);
  Value operator()(const ComplexPoint2& q) const;

 private:
  Program program_;
};

ComplexCovector2 gradient(const ScalarField& f, const ComplexPoint2& q);
HermitianForm2 levi(const ScalarField& f, const ComplexPoint2& q);
complex levi_pair(const ScalarField& f, const VectorField2& X, const VectorField2& Y, const ComplexPoint2& q);

struct GeometryOptions {
  /// Minimum |∂ρ| for frames and normals.
  double gradient_floor = 1e-12;
  /// |ρ(p)| allowed for a point treated as lying on bΩ.
  double boundary_tol = 1e-10;
  /// Relative threshold: weak iff H_ρ(L,L)(p) < tau_weak * hessian scale.
  double tau_weak = 1e-8;
};

/// Frame evaluated at a point.
struct LocalFrame {
  ComplexVector2 L;
  ComplexVector2 N;
  double grad_norm = 0.0;
};

struct FrameDecomposition {
  complex a;
  complex b;
};

/// Coefficients of ξ = a L + b N.
FrameDecomposition decompose(const ComplexVector2& xi, const LocalFrame& frame);

enum class Classification { strict, weak };

const char* to_string(Classification c);

/// Cached symbolic derivatives of a defining function and their compiled
/// programs. Immutable after construction apart from lazily compiled
/// third-order programs, which are initialized once under std::call_once.
class BoundaryGeometry {
 public:
  explicit BoundaryGeometry(ScalarField rho, GeometryOptions opts = {});
  ~BoundaryGeometry();
  BoundaryGeometry(const BoundaryGeometry&) = delete;
  BoundaryGeometry& operator=(const BoundaryGeometry&) = delete;

  const ScalarField& rho() const { return rho_; }
  const GeometryOptions& options() const { return opts_; }
  const FrameFields& frame() const { return frame_; }
  /// H_ρ(L, L) as a field.
  const ScalarField& levi_LL_field() const { return levi_LL_; }
  /// H_ρ(N, L) as a field.
  const ScalarField& levi_NL_field() const { return levi_NL_; }
  /// |∂ρ|² as a field.
  const ScalarField& grad_norm2_field() const { return grad_norm2_; }

  double value(const ComplexPoint2& q) const;
  ComplexCovector2 gradient(const ComplexPoint2& q) const;
  /// Throws DegenerateGradient when |∂ρ(q)| is below the floor.
  LocalFrame frame_at(const ComplexPoint2& q) const;
  /// Outward unit normal as a complex vector; equals N(q).
  ComplexVector2 unit_normal(const ComplexPoint2& q) const { return frame_at(q).N; }
  HermitianForm2 levi(const ComplexPoint2& q) const;
  double levi_LL(const ComplexPoint2& q) const;
  complex levi_NL(const ComplexPoint2& q) const;
  /// (∂/∂z1, ∂/∂z2) of H_ρ(L,L) at q.
  ComplexCovector2 d_levi_LL(const ComplexPoint2& q) const;
  /// (∂/∂z1, ∂/∂z2) of H_ρ(N,L) at q.
  ComplexCovector2 d_levi_NL(const ComplexPoint2& q) const;

 private:
  const Program& third_order() const;

  ScalarField rho_;
  GeometryOptions opts_;
  FrameFields frame_;
  ScalarField grad_norm2_;
  ScalarField levi_LL_;
  ScalarField levi_NL_;
  Program first_;   // ρ, ρ_{z1}, ρ_{z2}
  Program second_;  // Hessian entries, H(L,L), H(N,L)
  mutable std::once_flag third_once_;
  mutable std::unique_ptr<Program> third_;  // ∂H(L,L), ∂H(N,L)
};

struct ProjectionOptions {
  double tol = 1e-12;
  int max_iter = 200;
};

struct Projection {
  ComplexPoint2 p;
  /// Signed distance |p - q|, negative inside Ω (where ρ < 0).
  double distance = 0.0;
  int iterations = 0;
};

/// Foot point of q on bΩ along the normal line. Iterates p ← q - t n(p),
/// solving ρ(q - t n) = 0 for t each round by damped Newton with a bisection
/// fallback, until the foot point is stationary.
Projection project_to_boundary(const BoundaryGeometry& geom, const ComplexPoint2& q, ProjectionOptions opts = {});

/// Throws NotOnBoundary if |ρ(p)| exceeds the boundary tolerance.
Classification classify(const BoundaryGeometry& geom, const ComplexPoint2& p);

/// A_p = N H_ρ(L, L)(p), real part. At weak points the imaginary part must
/// vanish to 1e-10 * scale.
double obstruction(const BoundaryGeometry& geom, const ComplexPoint2& p);

/// ⟨∂H_ρ(N, L), L⟩(p) = Σ L_j ∂H_ρ(N,L)/∂z_j (p).
complex frame_identity_lhs(const BoundaryGeometry& geom, const ComplexPoint2& p);

struct BoundaryPoint {
  ComplexPoint2 p;
  double rho = 0.0;
  ComplexCovector2 grad;
  double levi_LL = 0.0;
  complex levi_NL;
  double hessian_scale = 1.0;
  Classification classification = Classification::strict;
  /// N H_ρ(L, L)(p); populated for weak points.
  std::optional<double> obstruction;
};

BoundaryPoint analyze_boundary_point(const BoundaryGeometry& geom, const ComplexPoint2& p);

struct TaylorCheck {
  std::vector<double> depths;
  std::vector<double> remainders;
  double slope = 0.0;
  /// Every remainder is at rounding level.
  bool exact = false;

  bool second_order(double min_slope = 1.8) const { return exact || slope >= min_slope; }
};

/// Remainder |f(q) - f(p) + 2d Re(N f)(p)| at q = p - d n_p for each depth d,
/// with the log-log slope of remainder against depth.
TaylorCheck taylor_normal_check(const ScalarField& f, const BoundaryGeometry& geom, const ComplexPoint2& p,
                                const std::vector<double>& depths);

/// |Y(ρ)(p)| for Y_k = Σ_j conj(X_j) ∂X_k/∂z̄_j. Requires p weak and X
/// complex tangential at p; throws PreconditionError otherwise.
double lemma_weak_tangential_check(const BoundaryGeometry& geom, const VectorField2& X, const ComplexPoint2& p);

}  // namespace pshkit
