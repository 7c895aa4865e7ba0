#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "pshkit/commands.hpp"
#include "pshkit/errors.hpp"
#include "pshkit/parse.hpp"
#include "pshkit/verify.hpp"

using namespace pshkit;
using testkit::random_points;

namespace {

const ComplexPoint2 origin{};
const Box kPatch{{{{-0.1, 0.1}, {-0.1, 0.1}, {-0.05, 0.05}, {-0.005, 0.005}}}};

double norm2(const ComplexPoint2& q) { return std::norm(q.z1) + std::norm(q.z2); }

double dist(const ComplexPoint2& a, const ComplexPoint2& b) {
  return std::sqrt(std::norm(a.z1 - b.z1) + std::norm(a.z2 - b.z2));
}

SampleSet samples_for(const BoundaryGeometry& g, const Box& box, std::size_t n = 300, std::uint64_t seed = 1) {
  SamplingPlan plan;
  plan.box = box;
  plan.n_boundary = n;
  plan.seed = seed;
  return build_samples(g, plan);
}

std::vector<ComplexPoint2> points_of(const std::vector<CollarSample>& c) {
  std::vector<ComplexPoint2> out;
  for (const CollarSample& s : c) out.push_back(s.q);
  return out;
}

}  // namespace

TEST(Halton, UnitCubeAndDeterministic) {
  HaltonSequence a(5), b(5), c(6);
  std::array<double, 4> mean{};
  bool differs = false;
  for (int i = 0; i < 4096; ++i) {
    const auto x = a.next(), y = b.next(), z = c.next();
    EXPECT_EQ(x, y);
    differs = differs || x != z;
    for (int d = 0; d < 4; ++d) {
      ASSERT_GE(x[d], 0.0);
      ASSERT_LT(x[d], 1.0);
      mean[d] += x[d] / 4096;
    }
  }
  EXPECT_TRUE(differs);
  for (double m : mean) EXPECT_NEAR(m, 0.5, 2e-3);
}

TEST(SampleBoundary, Ball) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const auto pts = sample_boundary(g, Box::cube(-1.2, 1.2), 100, 1);
  ASSERT_EQ(pts.size(), 100u);
  for (const BoundaryPoint& bp : pts) EXPECT_LE(std::abs(std::sqrt(norm2(bp.p)) - 1.0), 1e-10);
}

TEST(SampleBoundary, ExampleSmallBox) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const auto pts = sample_boundary(g, kPatch, 50, 1);
  ASSERT_EQ(pts.size(), 50u);
  for (const BoundaryPoint& bp : pts) {
    EXPECT_LE(std::abs(g.value(bp.p)), 1e-10);
    EXPECT_TRUE(kPatch.contains(bp.p));
  }
}

TEST(SampleBoundary, DisjointBoxUndersamples) {
  const BoundaryGeometry g(parse(testkit::kBall));
  EXPECT_THROW(sample_boundary(g, Box::cube(-0.3, 0.3), 50, 1), UndersamplingError);
  EXPECT_THROW(sample_boundary(g, Box::cube(2.0, 3.0), 50, 1), UndersamplingError);
  EXPECT_THROW(sample_boundary(g, Box::cube(1.0, 0.0), 50, 1), PreconditionError);
}

TEST(SampleBoundary, DeterministicForSeed) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const auto a = sample_boundary(g, kPatch, 40, 7), b = sample_boundary(g, kPatch, 40, 7);
  const auto c = sample_boundary(g, kPatch, 40, 8);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].p, b[i].p);
  EXPECT_FALSE(a[0].p == c[0].p);
}

TEST(SampleCollar, Examples) {
  const BoundaryGeometry ball(parse(testkit::kBall));
  const auto c = sample_collar(ball, {analyze_boundary_point(ball, {0.0, 1.0})}, {0.1}, Side::interior);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_LT(dist(c[0].q, {0.0, 0.9}), 1e-15);
  EXPECT_EQ(c[0].d, -0.1);

  const BoundaryGeometry ex(parse(testkit::kExample));
  const BoundaryPoint o = analyze_boundary_point(ex, origin);
  const auto in = sample_collar(ex, {o}, {0.01}, Side::interior);
  const auto out = sample_collar(ex, {o}, {0.01}, Side::exterior);
  EXPECT_LT(dist(in[0].q, {0.0, -0.01}), 1e-15);
  EXPECT_LT(dist(out[0].q, {0.0, 0.01}), 1e-15);
  EXPECT_GT(out[0].d, 0.0);
  EXPECT_LT(in[0].d, 0.0);
}

TEST(SampleCollar, InvariantsAndReach) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch);
  for (const auto* collar : {&s.collar_in, &s.collar_out}) {
    for (const CollarSample& c : *collar) {
      const Projection back = project_to_boundary(g, c.q);
      EXPECT_LE(dist(back.p, c.p), 1e-6 * std::abs(c.d));
      EXPECT_NEAR(back.distance, c.d, 1e-6 * std::abs(c.d));
    }
  }
  // Past the centre of the ball the foot point jumps to the antipode.
  const BoundaryGeometry ball(parse(testkit::kBall));
  EXPECT_THROW(sample_collar(ball, {analyze_boundary_point(ball, {0.0, 1.0})}, {1.5}, Side::interior),
               PreconditionError);
  EXPECT_THROW(sample_collar(ball, {analyze_boundary_point(ball, {0.0, 1.0})}, {0.0}, Side::interior),
               PreconditionError);
}

TEST(WeakSearch, ExampleFindsObstruction) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch);
  EXPECT_GT(s.weak_count(), 0u);
  const ObstructionScan scan = obstruction_scan(s.boundary);
  ASSERT_TRUE(scan.max_A);
  EXPECT_NEAR(*scan.max_A, 0.5, 1e-6);
  // Attained on the weak set z = 0.
  EXPECT_LT(std::abs(scan.rows[*scan.argmax].p.z1), 1e-6);
  for (const ObstructionRow& row : scan.rows) {
    EXPECT_EQ(row.A.has_value(), row.classification == Classification::weak);
  }
}

TEST(WeakSearch, BallHasNone) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const SampleSet s = samples_for(g, Box::cube(-1.2, 1.2));
  const ObstructionScan scan = obstruction_scan(s.boundary);
  EXPECT_EQ(scan.weak_count, 0u);
  EXPECT_FALSE(scan.max_A);
}

TEST(WeakSearch, FixedFunctionHasHarmlessWeakSet) {
  const BoundaryGeometry g(parse(testkit::kFixed));
  const SampleSet s = samples_for(g, kPatch);
  const ObstructionScan scan = obstruction_scan(s.boundary);
  EXPECT_GT(scan.weak_count, 0u);
  for (const ObstructionRow& row : scan.rows) {
    if (row.A) EXPECT_LE(*row.A, 1e-6);
  }
}

TEST(CheckPshOnBoundary, Examples) {
  const BoundaryGeometry ex(parse(testkit::kExample));
  const SampleSet s = samples_for(ex, kPatch);
  const VerificationReport a = check_psh_on_boundary(ex.rho(), s.boundary);
  EXPECT_TRUE(a.pass) << a.min_margin;
  EXPECT_EQ(a.n_samples, s.boundary.size());

  const VerificationReport b = check_psh_on_boundary(parse("-abs2(z1)"), s.boundary);
  EXPECT_FALSE(b.pass);
  EXPECT_DOUBLE_EQ(b.min_margin, -1.0);

  const BoundaryGeometry fx(parse(testkit::kFixed));
  const SampleSet sf = samples_for(fx, kPatch);
  const VerificationReport c = check_psh_on_boundary(fx.rho(), sf.boundary);
  EXPECT_TRUE(c.pass);
  EXPECT_GE(c.min_margin, 0.0);

  EXPECT_THROW(check_psh_on_boundary(ex.rho(), {}), PreconditionError);
}

TEST(CheckMainEstimate, BallAgainstEigenvalueOracle) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const auto boundary = sample_boundary(g, Box::cube(-1.2, 1.2), 200, 2);
  const auto collar = sample_collar(g, boundary, {1e-3, 1e-2, 0.05, 0.1}, Side::interior);
  const double eps = 0.1, K = 0.1;
  const VerificationReport rep = check_main_estimate(g.rho(), eps, K, collar, Side::interior);
  EXPECT_TRUE(rep.pass);
  // M = (1 - ερ) I - K z̄⊗z: eigenvalues 1 - ερ and 1 - ερ - K|z|².
  for (std::size_t i = 0; i < collar.size(); ++i) {
    const double s = norm2(collar[i].q), rho = s - 1.0;
    const double l1 = 1.0 - eps * rho, l2 = 1.0 - eps * rho - K * s;
    const double frob = std::sqrt(l1 * l1 + l2 * l2);
    EXPECT_NEAR(rep.margins[i], std::min(l1, l2) / std::max(1.0, frob), 1e-12);
  }
}

TEST(CheckMainEstimate, ExampleNormalSegment) {
  const BoundaryGeometry g(parse(testkit::kExample));
  SampleSet s;
  s.boundary = {analyze_boundary_point(g, origin)};
  s.collar_in = sample_collar(g, s.boundary, {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, Side::interior);
  s.collar_out = sample_collar(g, s.boundary, {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, Side::exterior);

  const VerificationReport bare = check_main_estimate(g.rho(), 0.1, 0.0, s.collar_in, Side::interior);
  EXPECT_FALSE(bare.pass);
  // On the normal line the Levi form is diag(Re w + |w|², 1): the margin is Re w + |w|² - ε ρ < 0.
  const double w = -1e-2, expect = (w + w * w) - 0.1 * (w + w * w);
  EXPECT_NEAR(bare.min_margin * std::max(1.0, std::hypot(1.0 - 0.1 * (w + w * w), expect)), expect, 1e-12);

  MainEstimateOptions opts;
  const VerificationReport fixed = run_main_estimate_pipeline(g, s, Side::interior, opts);
  EXPECT_TRUE(fixed.pass) << fixed.min_margin;
  EXPECT_NEAR(fixed.params.C, 3.95, 0.01);
}

TEST(CheckMainEstimate, WrongSideSample) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const auto boundary = sample_boundary(g, Box::cube(-1.2, 1.2), 10, 2);
  const auto out = sample_collar(g, boundary, {0.01}, Side::exterior);
  EXPECT_THROW(check_main_estimate(g.rho(), 0.1, 0.1, out, Side::interior), PreconditionError);
  const auto in = sample_collar(g, boundary, {0.01}, Side::interior);
  EXPECT_THROW(check_main_estimate(g.rho(), 0.1, 0.1, in, Side::exterior), PreconditionError);
  EXPECT_THROW(check_main_estimate(g.rho(), 0.1, 0.1, {}, Side::interior), PreconditionError);
}

TEST(CheckMainEstimate, ZeroParametersReduceToPsh) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch, 100);
  const ScalarField r1 = quadratic_boost(modified_defining(g.rho(), 3.95, Side::interior), 2.0);
  const VerificationReport rep = check_main_estimate(r1, 0.0, 0.0, s.collar_in, Side::interior);
  for (std::size_t i = 0; i < s.collar_in.size(); ++i) {
    const HermitianForm2 h = levi(r1, s.collar_in[i].q);
    EXPECT_NEAR(rep.margins[i], h.min_eigenvalue() / h.scale(), 1e-12);
  }
}

// Scalar inequality at any ξ is implied by the eigenvalue margin.
TEST(CheckMainEstimate, EigenvalueMarginIsSound) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch, 200);
  const ScalarField r1 = quadratic_boost(modified_defining(g.rho(), 3.95, Side::interior), 2.0);
  const double eps = 0.1, K = 2.0;
  const VerificationReport rep = check_main_estimate(r1, eps, K, s.collar_in, Side::interior);
  const auto xis = random_points(1000, 1.0, 301);
  for (std::size_t i = 0; i < xis.size(); ++i) {
    const std::size_t k = (i * 7919) % s.collar_in.size();
    const ComplexPoint2 q = s.collar_in[k].q;
    const ComplexVector2 xi{xis[i].z1, xis[i].z2};
    const HermitianForm2 h = levi(r1, q);
    const double r = eval(r1, q).real();
    const complex dr = gradient(r1, q).apply(xi);
    const double scalar = h.apply(xi, xi).real() - eps * r * xi.norm2() - K * std::norm(dr);
    const HermitianForm2 m = h - (eps * r) * HermitianForm2::identity() - K * HermitianForm2::outer(gradient(r1, q));
    EXPECT_GE(scalar, rep.margins[k] * m.scale() * xi.norm2() - 1e-9);
  }
}

TEST(Pipeline, KDoublingReachesPassingK) {
  // Strictly pseudoconvex, but H(N,N) = -1/2: only the K|∂r|² term can fix the normal direction.
  const BoundaryGeometry g(parse("re(z2) + abs2(z1) - 0.5*abs2(z2)"));
  const SampleSet s = samples_for(g, Box{{{{-0.1, 0.1}, {-0.1, 0.1}, {-0.05, 0.05}, {-0.05, 0.05}}}}, 100);
  MainEstimateOptions opts;
  opts.K = 0.25;
  const VerificationReport rep = run_main_estimate_pipeline(g, s, Side::interior, opts);
  EXPECT_TRUE(rep.pass);
  ASSERT_GE(rep.K_tried.size(), 2u);
  EXPECT_EQ(rep.K_tried.front(), 0.25);
  for (std::size_t i = 1; i < rep.K_tried.size(); ++i) EXPECT_EQ(rep.K_tried[i], 2 * rep.K_tried[i - 1]);
  EXPECT_EQ(rep.params.K, rep.K_tried.back());

  opts.K_cap = 0.5;
  const VerificationReport capped = run_main_estimate_pipeline(g, s, Side::interior, opts);
  EXPECT_FALSE(capped.pass);
  EXPECT_EQ(capped.K_tried, (std::vector<double>{0.25, 0.5}));

  opts.K = 0.0;
  const VerificationReport frozen = run_main_estimate_pipeline(g, s, Side::interior, opts);
  EXPECT_FALSE(frozen.pass);
  EXPECT_EQ(frozen.K_tried, (std::vector<double>{0.0}));
}

TEST(Pipeline, ForcedZeroFailsNearOriginNormal) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch);
  MainEstimateOptions opts;
  opts.C = 0.0;
  opts.K = 0.0;
  const VerificationReport rep = run_main_estimate_pipeline(g, s, Side::interior, opts);
  EXPECT_FALSE(rep.pass);
  EXPECT_LT(rep.min_margin, -1e-9);
  const ComplexPoint2 w = rep.argmin_point;
  EXPECT_LT(std::sqrt(std::norm(w.z1) + w.z2.imag() * w.z2.imag()), 1e-2);
  EXPECT_LT(w.z2.real(), 0.0);
}

TEST(Pipeline, Deterministic) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet a = samples_for(g, kPatch, 200, 3), b = samples_for(g, kPatch, 200, 3);
  const VerificationReport ra = run_main_estimate_pipeline(g, a, Side::interior, {});
  const VerificationReport rb = run_main_estimate_pipeline(g, b, Side::interior, {});
  EXPECT_EQ(ra.margins, rb.margins);
  EXPECT_EQ(ra.params.C, rb.params.C);
  EXPECT_EQ(ra.argmin_point, rb.argmin_point);
}

TEST(CheckStrictPsh, Examples) {
  const ScalarField ball = parse(testkit::kBall);
  std::vector<ComplexPoint2> inside;
  for (const auto& q : random_points(4000, 1.0, 307)) {
    if (norm2(q) <= 0.99 * 0.99) inside.push_back(q);
  }
  const double D = 1.0;
  const VerificationReport a =
      check_strict_psh(df_interior(ball, 0.5, choose_delta(0.5, D, Side::interior)), inside, 1e-6);
  EXPECT_TRUE(a.pass) << a.min_margin;

  const VerificationReport b = check_strict_psh(re(ScalarField::z1()), inside, 1e-6);
  EXPECT_FALSE(b.pass);
  EXPECT_DOUBLE_EQ(b.min_margin, -1e-6);

  std::vector<ComplexPoint2> shell;
  for (const auto& q : random_points(4000, 1.2, 311)) {
    const double n = std::sqrt(norm2(q));
    if (n > 1.0 && n <= 1.1) shell.push_back(q);
  }
  ASSERT_GT(shell.size(), 100u);
  const VerificationReport c =
      check_strict_psh(df_exterior(ball, 2.0, choose_delta(2.0, 1.21, Side::exterior)), shell, 1e-6);
  EXPECT_TRUE(c.pass) << c.min_margin;
  EXPECT_THROW(check_strict_psh(ball, {}, 0.0), PreconditionError);
}

TEST(ReportInvariant, PassMatchesMinMargin) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch, 100);
  for (double C : {0.0, 3.95}) {
    const ScalarField r = modified_defining(g.rho(), C, Side::interior);
    const VerificationReport rep = check_main_estimate(r, 0.1, 0.0, s.collar_in, Side::interior);
    EXPECT_EQ(rep.pass, rep.min_margin >= -rep.tolerance);
    EXPECT_EQ(rep.min_margin, *std::min_element(rep.margins.begin(), rep.margins.end()));
    EXPECT_EQ(rep.margins[rep.argmin], rep.min_margin);
    EXPECT_EQ(rep.argmin_point, s.collar_in[rep.argmin].q);
  }
}

TEST(DfExponent, Ball) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const SampleSet s = samples_for(g, Box::cube(-1.2, 1.2), 300);
  ExponentOptions opts;
  const VerificationReport in = estimate_df_exponent(g, s, points_of(s.collar_in), Side::interior, opts);
  ASSERT_TRUE(in.best_eta);
  EXPECT_GE(*in.best_eta, 0.99);
  EXPECT_EQ(in.per_eta.size(), default_eta_grid(Side::interior).size());

  opts.eta_grid = {2.0};
  const VerificationReport out = estimate_df_exponent(g, s, points_of(s.collar_out), Side::exterior, opts);
  ASSERT_TRUE(out.best_eta);
  EXPECT_EQ(*out.best_eta, 2.0);
}

TEST(DfExponent, ExampleNearOrigin) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const SampleSet s = samples_for(g, kPatch);
  const VerificationReport in = estimate_df_exponent(g, s, points_of(s.collar_in), Side::interior, {});
  ASSERT_TRUE(in.best_eta);
  EXPECT_GE(*in.best_eta, 0.9);
  EXPECT_GT(in.params.C, 0.0);
  EXPECT_GT(in.params.D, 0.0);
}

TEST(DfExponent, Errors) {
  const BoundaryGeometry g(parse(testkit::kBall));
  const SampleSet s = samples_for(g, Box::cube(-1.2, 1.2), 50);
  EXPECT_THROW(estimate_df_exponent(g, s, {}, Side::interior, {}), PreconditionError);
  // Points outside cannot carry an interior exhaustion.
  EXPECT_THROW(estimate_df_exponent(g, s, points_of(s.collar_out), Side::interior, {}), PreconditionError);
  ExponentOptions bad;
  bad.eta_grid = {1.5};
  const VerificationReport rep = estimate_df_exponent(g, s, points_of(s.collar_in), Side::interior, bad);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.best_eta);
  EXPECT_FALSE(rep.per_eta.at(0).error.empty());
}

TEST(Config, ParsesAndValidates) {
  const DomainConfig cfg = parse_config(nlohmann::json::parse(R"j({
    "rho": "abs2(z1) + abs2(z2) - 1",
    "box": [[-1.2, 1.2], [-1.2, 1.2], [-1.2, 1.2], [-1.2, 1.2]],
    "sampling": {"n_boundary": 50, "seed": 4},
    "params": {"epsilon": 0.2, "C": 0}
  })j"));
  EXPECT_EQ(cfg.sampling.n_boundary, 50u);
  EXPECT_EQ(cfg.sampling.seed, 4u);
  EXPECT_EQ(cfg.params.epsilon, 0.2);
  EXPECT_EQ(cfg.params.C, 0.0);
  EXPECT_TRUE(cfg.eta_grid.empty());
  EXPECT_FALSE(parse_config(nlohmann::json::parse(
                   R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1],[0,1]], "params": {"C": null, "eta": null}})j"))
                   .params.C);
  const DomainConfig back = parse_config(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));

  auto bad = [](const char* text) { return parse_config(nlohmann::json::parse(text)); };
  EXPECT_THROW(bad(R"j({"box": [[0,1],[0,1],[0,1],[0,1]]})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "z1", "box": [[0,1],[0,1],[0,1],[0,1]]})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1", "box": [[0,1],[0,1],[0,1],[0,1]]})j"), ParseError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[1,0],[0,1],[0,1],[0,1]]})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1]]})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1],[0,1]], "tolerances": {"floor": 0}})j"),
               ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1],[0,1]], "params": {"eta": 1}})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1],[0,1]], "colour": 1})j"), ConfigError);
  EXPECT_THROW(bad(R"j({"rho": "re(z1)", "box": [[0,1],[0,1],[0,1],["a",1]]})j"), ConfigError);
}

TEST(Config, Fixtures) {
  for (const std::string& name : fixture_names()) {
    const DomainConfig cfg = fixture(name);
    EXPECT_NO_THROW(cfg.validate()) << name;
    EXPECT_EQ(cfg.name, name);
  }
  EXPECT_THROW(fixture("torus"), ConfigError);
  DomainConfig cfg = fixture("ball");
  apply(cfg, {9u, 0.3, 0.9, std::nullopt, 2.0, 64u});
  EXPECT_EQ(cfg.sampling.seed, 9u);
  EXPECT_EQ(cfg.params.epsilon, 0.3);
  EXPECT_EQ(cfg.params.eta, 0.9);
  EXPECT_FALSE(cfg.params.C);
  EXPECT_EQ(cfg.params.K, 2.0);
  EXPECT_EQ(cfg.sampling.n_boundary, 64u);
  EXPECT_THROW(apply(cfg, {std::nullopt, -1.0}), ConfigError);
}
