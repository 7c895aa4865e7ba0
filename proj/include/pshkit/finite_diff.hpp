#pragma once

#include <vector>

#include "pshkit/eval.hpp"
#include "pshkit/expr.hpp"

namespace pshkit {

struct FdCheck {
  complex symbolic;
  complex numeric;
  double discrepancy;
};

/// Nested central differences on the real coordinates (x_j, y_j) of q,
/// recombined as ∂/∂z = (∂x - i∂y)/2 and ∂/∂z̄ = (∂x + i∂y)/2.
/// Independent of the symbolic differentiation path: only values of f are used.
complex fd_wirtinger(const Program& f, const WirtingerIndex& idx, const ComplexPoint2& q, double h);

/// Compares wirtinger(f, idx) at q against fd_wirtinger. Requires order ≤ 3
/// and h in [1e-6, 1e-2].
FdCheck fd_check(const ScalarField& f, const WirtingerIndex& idx, const ComplexPoint2& q, double h);

struct FdConvergence {
  std::vector<double> steps;
  std::vector<double> discrepancies;
  /// Rounding-error level per step, ~ machine eps * |f| / h^order.
  std::vector<double> noise;
  /// Least-squares log-log slope over steps whose discrepancy clears 10x noise.
  double slope = 0.0;
  /// Fewer than two steps cleared the noise level: the difference quotients
  /// agree with the symbolic value to rounding at every step.
  bool exact = false;

  bool second_order(double min_slope = 1.8) const { return exact || slope >= min_slope; }
};

FdConvergence fd_convergence(const ScalarField& f, const WirtingerIndex& idx, const ComplexPoint2& q,
                             const std::vector<double>& steps = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4});

}  // namespace pshkit
