#pragma once

// Modified defining functions and exhaustion functions built from ρ:
//
//   σ  = |H_ρ(N, L)|²
//   r  = ρ exp(-Cσ)   (interior)   or   ρ exp(+Cσ)   (exterior)
//   r1 = r + K r²
//   g1 = -(-r exp(-δ|z|²))^η,  η ∈ (0,1)        on the interior side
//   g2 =  ( r exp(+δ|z|²))^η,  η > 1            on the exterior side

#include <optional>
#include <vector>

#include "pshkit/expr.hpp"
#include "pshkit/geometry.hpp"

namespace pshkit {

enum class Side { interior, exterior };

const char* to_string(Side s);

struct TransformParams {
  double C = 0.0;
  double K = 0.0;
  double epsilon = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double D = 0.0;
  Side side = Side::interior;
};

struct ConstantEstimates {
  /// min |∂ρ| over boundary samples.
  double c3 = 0.0;
  /// max d / |ρ| over collar samples.
  double c4 = 0.0;
  /// max obstruction over weak samples (0 when there are none).
  double A_max = 0.0;
};

/// σ = |H_ρ(N,L)|², built as |numerator|² / (|∂ρ|²)² without sqrt.
ScalarField sigma(const ScalarField& rho);

/// ρ exp(∓Cσ). C must be ≥ 0.
ScalarField modified_defining(const ScalarField& rho, double C, Side side);

/// r + K r². K must be ≥ 0.
ScalarField quadratic_boost(const ScalarField& r, double K);

/// A point of the collar: q, its foot point p = π(q), signed distance d.
struct CollarSample {
  ComplexPoint2 q;
  ComplexPoint2 p;
  double d = 0.0;
};

ConstantEstimates estimate_constants(const BoundaryGeometry& geom, const std::vector<BoundaryPoint>& boundary,
                                     const std::vector<CollarSample>& collar);

struct ChosenC {
  double C = 0.0;
  /// Index into the weak sample list attaining the max, if any ratio was positive.
  std::optional<std::size_t> argmax;
};

/// C = max{0, max_weak (-ε/(16 c4) + s A_p) / (c3 A_p²)}, s = +1 interior, -1 exterior.
ChosenC choose_C(double epsilon, const ConstantEstimates& est, const std::vector<double>& weak_obstructions,
                 Side side = Side::interior);

/// δ = (1-η)/(2ηD) on the interior side (η ∈ (0,1)), (η-1)/(2ηD) on the exterior side (η > 1).
double choose_delta(double eta, double D, Side side);

/// -(-r exp(-δ|z|²))^η. Evaluation outside {r < 0} raises EvalError::power_domain.
ScalarField df_interior(const ScalarField& r, double eta, double delta);
/// (r exp(δ|z|²))^η. Evaluation outside {r > 0} raises EvalError::power_domain.
ScalarField df_exterior(const ScalarField& r, double eta, double delta);

}  // namespace pshkit
