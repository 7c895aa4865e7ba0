#pragma once

// Inequality checks over sample sets. Every "for all ξ" statement is decided
// by the smallest eigenvalue of a 2x2 Hermitian form, so no ξ is sampled.

#include <optional>
#include <string>
#include <vector>

#include "pshkit/sampling.hpp"
#include "pshkit/transforms.hpp"

namespace pshkit {

/// One exponent tried by the exhaustion pipeline.
struct EtaResult {
  double eta = 0.0;
  double delta = 0.0;
  bool pass = false;
  double min_margin = 0.0;
  ComplexPoint2 argmin;
  std::size_t n_samples = 0;
  /// Set when the exhaustion could not be evaluated on the region.
  std::string error;
};

struct VerificationReport {
  std::string check;
  TransformParams params;
  ConstantEstimates estimates;
  std::size_t n_samples = 0;
  /// Per-sample margins, in sample order.
  std::vector<double> margins;
  double min_margin = 0.0;
  std::size_t argmin = 0;
  ComplexPoint2 argmin_point;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t weak_count = 0;
  /// K values tried by the doubling loop, in order.
  std::vector<double> K_tried;
  std::vector<EtaResult> per_eta;
  /// Chosen exponent of the exhaustion pipeline, when one passed.
  std::optional<double> best_eta;
  double wall_time = 0.0;
};

/// Margin λ_min(H_f(p)) / scale at each boundary point; tolerance 1e-10.
VerificationReport check_psh_on_boundary(const ScalarField& f, const std::vector<BoundaryPoint>& boundary);

/// Margin λ_min(M(q)) / scale(M(q)) with
///   M = H_{r1} - ε r1 I - K ∂r1⊗∂̄r1   (interior),
///   M = H_{r1} + ε r1 I - K ∂r1⊗∂̄r1   (exterior).
/// Tolerance 1e-9 unless given. Collar samples on the wrong side throw PreconditionError.
VerificationReport check_main_estimate(const ScalarField& r1, double epsilon, double K,
                                       const std::vector<CollarSample>& collar, Side side, double tolerance = 1e-9);

/// Margin λ_min(H_g(q)) - floor; passes iff every margin is ≥ 0.
VerificationReport check_strict_psh(const ScalarField& g, const std::vector<ComplexPoint2>& region, double floor);

struct ObstructionRow {
  ComplexPoint2 p;
  Classification classification = Classification::strict;
  /// Only at weak points.
  std::optional<double> A;
};

struct ObstructionScan {
  std::vector<ObstructionRow> rows;
  std::size_t weak_count = 0;
  std::optional<double> max_A;
  std::optional<std::size_t> argmax;
};

ObstructionScan obstruction_scan(const std::vector<BoundaryPoint>& boundary);

struct MainEstimateOptions {
  double epsilon = 0.1;
  /// Overrides the formula for C.
  std::optional<double> C;
  /// First K tried; doubled until the check passes or K exceeds K_cap.
  /// K = 0 is never doubled.
  double K = 1.0;
  double K_cap = 65536.0;
  double tolerance = 1e-9;
};

/// σ → C → r = ρ e^{∓Cσ} → r1 = r + K r² → check_main_estimate, with K doubling.
VerificationReport run_main_estimate_pipeline(const BoundaryGeometry& geom, const SampleSet& samples, Side side,
                                              const MainEstimateOptions& opts);

struct ExponentOptions {
  MainEstimateOptions main;
  /// Default: {0.5, 0.75, 0.9, 0.95, 0.99} inside, {2, 1.5, 1.1, 1.01} outside.
  std::vector<double> eta_grid;
  double floor = 1e-8;
};

std::vector<double> default_eta_grid(Side side);

/// Runs the main-estimate pipeline to fix r1, then for each η builds the
/// exhaustion g (with δ from D = max |z|² over the region) and checks strict
/// plurisubharmonicity on the part of the region where r1 is still a defining
/// function (|2K r| < 1, same sign as ρ). The reported exponent is the largest
/// passing η inside and the passing η closest to 1 outside; pass is false when
/// none passes. An empty region throws PreconditionError.
VerificationReport estimate_df_exponent(const BoundaryGeometry& geom, const SampleSet& samples,
                                        const std::vector<ComplexPoint2>& region, Side side,
                                        const ExponentOptions& opts);

}  // namespace pshkit
