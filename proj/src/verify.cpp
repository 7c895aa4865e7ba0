#include "pshkit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pshkit/errors.hpp"

namespace pshkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Ordered min/argmin reduction; ties keep the first sample.
void reduce(VerificationReport& rep, const std::vector<ComplexPoint2>& points) {
  rep.n_samples = rep.margins.size();
  rep.argmin = 0;
  for (std::size_t i = 1; i < rep.margins.size(); ++i) {
    if (rep.margins[i] < rep.margins[rep.argmin]) rep.argmin = i;
  }
  rep.min_margin = rep.margins[rep.argmin];
  rep.argmin_point = points[rep.argmin];
  rep.pass = rep.min_margin >= -rep.tolerance;
}

double norm2_z(const ComplexPoint2& q) { return std::norm(q.z1) + std::norm(q.z2); }

}  // namespace

VerificationReport check_psh_on_boundary(const ScalarField& f, const std::vector<BoundaryPoint>& boundary) {
  const auto t0 = Clock::now();
  if (boundary.empty()) throw PreconditionError("check_psh_on_boundary: no boundary samples");
  VerificationReport rep;
  rep.check = "psh_on_boundary";
  rep.tolerance = 1e-10;
  const HessianJet jet(f);
  std::vector<ComplexPoint2> points;
  points.reserve(boundary.size());
  rep.margins.reserve(boundary.size());
  for (const BoundaryPoint& bp : boundary) {
    const HermitianForm2 h = jet(bp.p).levi;
    rep.margins.push_back(h.min_eigenvalue() / h.scale());
    points.push_back(bp.p);
    if (bp.classification == Classification::weak) ++rep.weak_count;
  }
  reduce(rep, points);
  rep.wall_time = seconds_since(t0);
  return rep;
}

VerificationReport check_main_estimate(const ScalarField& r1, double epsilon, double K,
                                       const std::vector<CollarSample>& collar, Side side, double tolerance) {
  const auto t0 = Clock::now();
  if (collar.empty()) throw PreconditionError("check_main_estimate: empty collar");
  const double sign = side == Side::interior ? 1.0 : -1.0;
  for (const CollarSample& s : collar) {
    if (!(sign * s.d < 0.0)) {
      throw PreconditionError(std::string("check_main_estimate: collar sample on the wrong side for ") +
                              to_string(side));
    }
  }
  VerificationReport rep;
  rep.check = side == Side::interior ? "main_estimate_interior" : "main_estimate_exterior";
  rep.params.epsilon = epsilon;
  rep.params.K = K;
  rep.params.side = side;
  rep.tolerance = tolerance;
  const HessianJet jet(r1);
  std::vector<ComplexPoint2> points;
  points.reserve(collar.size());
  rep.margins.reserve(collar.size());
  for (const CollarSample& s : collar) {
    const auto v = jet(s.q);
    const HermitianForm2 m =
        v.levi - (sign * epsilon * v.value.real()) * HermitianForm2::identity() - K * HermitianForm2::outer(v.grad);
    rep.margins.push_back(m.min_eigenvalue() / m.scale());
    points.push_back(s.q);
  }
  reduce(rep, points);
  rep.wall_time = seconds_since(t0);
  return rep;
}

VerificationReport check_strict_psh(const ScalarField& g, const std::vector<ComplexPoint2>& region, double floor) {
  const auto t0 = Clock::now();
  if (region.empty()) throw PreconditionError("check_strict_psh: empty region");
  VerificationReport rep;
  rep.check = "strict_psh";
  rep.tolerance = 0.0;
  const HessianJet jet(g);
  rep.margins.reserve(region.size());
  for (const ComplexPoint2& q : region) rep.margins.push_back(jet(q).levi.min_eigenvalue() - floor);
  reduce(rep, region);
  rep.wall_time = seconds_since(t0);
  return rep;
}

ObstructionScan obstruction_scan(const std::vector<BoundaryPoint>& boundary) {
  ObstructionScan scan;
  scan.rows.reserve(boundary.size());
  for (const BoundaryPoint& bp : boundary) {
    ObstructionRow row{bp.p, bp.classification, std::nullopt};
    if (bp.classification == Classification::weak) {
      ++scan.weak_count;
      row.A = bp.obstruction;
      if (row.A && (!scan.max_A || *row.A > *scan.max_A)) {
        scan.max_A = row.A;
        scan.argmax = scan.rows.size();
      }
    }
    scan.rows.push_back(row);
  }
  return scan;
}

VerificationReport run_main_estimate_pipeline(const BoundaryGeometry& geom, const SampleSet& samples, Side side,
                                              const MainEstimateOptions& opts) {
  const auto t0 = Clock::now();
  if (!(opts.K >= 0.0)) throw PreconditionError("K must be non-negative");
  const std::vector<CollarSample>& collar = side == Side::interior ? samples.collar_in : samples.collar_out;
  const ConstantEstimates est = estimate_constants(geom, samples.boundary, collar);
  const double C = opts.C ? *opts.C : choose_C(opts.epsilon, est, samples.weak_obstructions(), side).C;
  const ScalarField r = modified_defining(geom.rho(), C, side);

  double K = opts.K;
  std::vector<double> tried;
  VerificationReport rep;
  for (;;) {
    tried.push_back(K);
    rep = check_main_estimate(quadratic_boost(r, K), opts.epsilon, K, collar, side, opts.tolerance);
    if (rep.pass || K == 0.0 || 2.0 * K > opts.K_cap) break;
    K *= 2.0;
  }
  rep.params.C = C;
  rep.estimates = est;
  rep.weak_count = samples.weak_count();
  rep.K_tried = std::move(tried);
  rep.wall_time = seconds_since(t0);
  return rep;
}

std::vector<double> default_eta_grid(Side side) {
  if (side == Side::interior) return {0.5, 0.75, 0.9, 0.95, 0.99};
  return {2.0, 1.5, 1.1, 1.01};
}

VerificationReport estimate_df_exponent(const BoundaryGeometry& geom, const SampleSet& samples,
                                        const std::vector<ComplexPoint2>& region, Side side,
                                        const ExponentOptions& opts) {
  const auto t0 = Clock::now();
  if (region.empty()) throw PreconditionError("estimate_df_exponent: empty region");
  VerificationReport main = run_main_estimate_pipeline(geom, samples, side, opts.main);
  const double C = main.params.C, K = main.params.K;
  const ScalarField r = modified_defining(geom.rho(), C, side);
  const ScalarField r1 = quadratic_boost(r, K);

  // Keep the points where r1 = r(1 + K r) is a defining function on the right side.
  const double sign = side == Side::interior ? -1.0 : 1.0;
  const Program r_prog{r};
  std::vector<ComplexPoint2> kept;
  double D = 0.0;
  for (const ComplexPoint2& q : region) {
    const double rv = r_prog(q)[0].real();
    if (sign * rv > 0.0 && 2.0 * K * std::abs(rv) < 1.0) kept.push_back(q);
    D = std::max(D, norm2_z(q));
  }
  if (kept.empty()) throw PreconditionError("estimate_df_exponent: no region point where r1 defines the domain");

  VerificationReport rep;
  rep.check = side == Side::interior ? "df_exponent_interior" : "df_exponent_exterior";
  rep.params = main.params;
  rep.params.D = D;
  rep.estimates = main.estimates;
  rep.weak_count = main.weak_count;
  rep.K_tried = main.K_tried;
  rep.tolerance = 0.0;

  const std::vector<double> grid = opts.eta_grid.empty() ? default_eta_grid(side) : opts.eta_grid;
  const VerificationReport* best = nullptr;
  std::vector<VerificationReport> checks;
  checks.reserve(grid.size());
  for (double eta : grid) {
    EtaResult res;
    res.eta = eta;
    try {
      res.delta = choose_delta(eta, D, side);
      const ScalarField g = side == Side::interior ? df_interior(r1, eta, res.delta) : df_exterior(r1, eta, res.delta);
      checks.push_back(check_strict_psh(g, kept, opts.floor));
      const VerificationReport& c = checks.back();
      res.pass = c.pass;
      res.min_margin = c.min_margin;
      res.argmin = c.argmin_point;
      res.n_samples = c.n_samples;
      if (c.pass) {
        const bool better = !rep.best_eta || (side == Side::interior ? eta > *rep.best_eta
                                                                     : std::abs(eta - 1.0) < std::abs(*rep.best_eta - 1.0));
        if (better) {
          rep.best_eta = eta;
          rep.params.eta = eta;
          rep.params.delta = res.delta;
          best = &c;
        }
      }
    } catch (const Error& e) {
      res.error = e.what();
    }
    rep.per_eta.push_back(res);
  }
  if (best) {
    rep.margins = best->margins;
    rep.n_samples = best->n_samples;
    rep.min_margin = best->min_margin;
    rep.argmin = best->argmin;
    rep.argmin_point = best->argmin_point;
  } else {
    // Witness from the exponent with the largest margin among those evaluated.
    rep.n_samples = kept.size();
    for (const VerificationReport& c : checks) {
      if (rep.margins.empty() || c.min_margin > rep.min_margin) {
        rep.margins = c.margins;
        rep.min_margin = c.min_margin;
        rep.argmin = c.argmin;
        rep.argmin_point = c.argmin_point;
      }
    }
  }
  rep.pass = best != nullptr;
  rep.wall_time = seconds_since(t0);
  return rep;
}

}  // namespace pshkit
