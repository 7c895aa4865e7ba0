#include "pshkit/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pshkit/errors.hpp"

namespace pshkit {

const char* to_string(Side s) { return s == Side::interior ? "interior" : "exterior"; }

ScalarField sigma(const ScalarField& rho) {
  if (!rho.real_valued()) throw PreconditionError("sigma requires a real-valued defining function");
  using W = Wirtinger;
  const ScalarField g1 = wirtinger(rho, W::dz1), g2 = wirtinger(rho, W::dz2);
  const ScalarField gb1 = wirtinger(rho, W::dzbar1), gb2 = wirtinger(rho, W::dzbar2);
  const ScalarField h11 = wirtinger(g1, W::dzbar1), h12 = wirtinger(g1, W::dzbar2);
  const ScalarField h21 = wirtinger(g2, W::dzbar1), h22 = wirtinger(g2, W::dzbar2);
  // Σ h_{jk̄} Ñ_j conj(L̃_k) with Ñ = (ρ_{z̄1}, ρ_{z̄2}), conj(L̃) = (ρ_{z̄2}, -ρ_{z̄1}).
  const ScalarField numerator = h11 * gb1 * gb2 - h12 * gb1 * gb1 + h21 * gb2 * gb2 - h22 * gb2 * gb1;
  const ScalarField norm2 = (g1 * gb1 + g2 * gb2).assume_real();
  return (abs2(numerator) / pow(norm2, 2)).assume_real();
}

ScalarField modified_defining(const ScalarField& rho, double C, Side side) {
  if (!(C >= 0.0)) throw PreconditionError("C must be non-negative");
  if (C == 0.0) return rho;
  const double sign = side == Side::interior ? -1.0 : 1.0;
  return (rho * exp(sign * C * sigma(rho))).assume_real();
}

ScalarField quadratic_boost(const ScalarField& r, double K) {
  if (!(K >= 0.0)) throw PreconditionError("K must be non-negative");
  return (r + K * pow(r, 2)).assume_real();
}

ConstantEstimates estimate_constants(const BoundaryGeometry& geom, const std::vector<BoundaryPoint>& boundary,
                                     const std::vector<CollarSample>& collar) {
  if (boundary.empty()) throw PreconditionError("estimate_constants needs boundary samples");
  if (collar.empty()) throw PreconditionError("estimate_constants needs collar samples");
  ConstantEstimates est;
  est.c3 = std::numeric_limits<double>::infinity();
  bool any_weak = false;
  double a_max = -std::numeric_limits<double>::infinity();
  for (const BoundaryPoint& bp : boundary) {
    est.c3 = std::min(est.c3, bp.grad.norm());
    if (bp.classification == Classification::weak && bp.obstruction) {
      any_weak = true;
      a_max = std::max(a_max, *bp.obstruction);
    }
  }
  est.A_max = any_weak ? a_max : 0.0;
  for (const CollarSample& s : collar) {
    const double r = geom.value(s.q);
    if (!(std::abs(r) > 1e-14)) throw PreconditionError("collar sample with |ρ| ≤ 1e-14");
    est.c4 = std::max(est.c4, std::abs(s.d) / std::abs(r));
  }
  return est;
}

ChosenC choose_C(double epsilon, const ConstantEstimates& est, const std::vector<double>& weak_obstructions,
                 Side side) {
  if (!(epsilon > 0.0)) throw PreconditionError("epsilon must be positive");
  if (!(est.c3 > 0.0) || !(est.c4 > 0.0)) throw PreconditionError("constants c3 and c4 must be positive");
  const double sign = side == Side::interior ? 1.0 : -1.0;
  const double slack = epsilon / (16.0 * est.c4);
  ChosenC out;
  for (std::size_t i = 0; i < weak_obstructions.size(); ++i) {
    const double a = weak_obstructions[i];
    const double numerator = -slack + sign * a;
    if (std::abs(a) < 1e-12) {
      // The ratio tends to -inf when the numerator is negative; it cannot raise the max.
      if (numerator > 0.0) throw PreconditionError("degenerate C formula: vanishing A_p with positive numerator");
      continue;
    }
    const double ratio = numerator / (est.c3 * a * a);
    if (ratio > out.C) {
      out.C = ratio;
      out.argmax = i;
    }
  }
  return out;
}

double choose_delta(double eta, double D, Side side) {
  if (!(D > 0.0)) throw PreconditionError("D must be positive");
  if (eta == 1.0) throw PreconditionError("eta = 1 lies on neither side");
  if (side == Side::interior) {
    if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("interior exponent must lie in (0,1)");
    return (1.0 - eta) / (2.0 * eta * D);
  }
  if (!(eta > 1.0)) throw PreconditionError("exterior exponent must exceed 1");
  return (eta - 1.0) / (2.0 * eta * D);
}

namespace {

ScalarField norm2_z() {
  return (abs2(ScalarField::z1()) + abs2(ScalarField::z2())).assume_real();
}

}  // namespace

ScalarField df_interior(const ScalarField& r, double eta, double delta) {
  if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  const ScalarField base = -(r * exp(-delta * norm2_z()));
  return (-rpow(base, eta)).assume_real();
}

ScalarField df_exterior(const ScalarField& r, double eta, double delta) {
  if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  return rpow(r * exp(delta * norm2_z()), eta).assume_real();
}

}  // namespace pshkit
