#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "corpus.hpp"
#include "pshkit/errors.hpp"
#include "pshkit/geometry.hpp"
#include "pshkit/parse.hpp"

using namespace pshkit;
using testkit::random_points;

namespace {

const ComplexPoint2 origin{};

// Complex Hessian f_{z_j z̄_k} from central differences of f on R^4.
// f_{z_j z̄_k} = (f_{x_j x_k} + f_{y_j y_k} + i(f_{x_j y_k} - f_{y_j x_k})) / 4.
std::array<complex, 4> fd_hessian(const ScalarField& f, const ComplexPoint2& q, double h = 1e-4) {
  const Program p{f};
  auto value = [&](std::array<double, 4> x) { return p({{x[0], x[1]}, {x[2], x[3]}})[0].real(); };
  const std::array<double, 4> x0{q.z1.real(), q.z1.imag(), q.z2.real(), q.z2.imag()};
  auto d2 = [&](int a, int b) {
    auto shifted = [&](double sa, double sb) {
      auto x = x0;
      x[a] += sa * h;
      x[b] += sb * h;
      return value(x);
    };
    return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * h * h);
  };
  std::array<complex, 4> out;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      out[2 * j + k] = complex(d2(xj, xk) + d2(yj, yk), d2(xj, yk) - d2(yj, xk)) / 4.0;
    }
  }
  return out;
}

double dist(const ComplexPoint2& a, const ComplexPoint2& b) {
  return std::sqrt(std::norm(a.z1 - b.z1) + std::norm(a.z2 - b.z2));
}

struct Domains : ::testing::Test {
  static void SetUpTestSuite() {
    ball = std::make_unique<BoundaryGeometry>(parse(testkit::kBall));
    example = std::make_unique<BoundaryGeometry>(parse(testkit::kExample));
    fixed = std::make_unique<BoundaryGeometry>(parse(testkit::kFixed));
  }
  static inline std::unique_ptr<BoundaryGeometry> ball, example, fixed;
};

}  // namespace

TEST(Gradient, SpecExamples) {
  const ComplexCovector2 a = gradient(parse(testkit::kBall), {0.0, 1.0});
  EXPECT_EQ(a.c1, complex(0.0));
  EXPECT_EQ(a.c2, complex(1.0));
  const ComplexCovector2 b = gradient(parse(testkit::kExample), origin);
  EXPECT_EQ(b.c1, complex(0.0));
  EXPECT_EQ(b.c2, complex(0.5));
  const ComplexCovector2 c = gradient(ScalarField::constant(3.0), {{0.2, 0.1}, {0.5, -0.4}});
  EXPECT_EQ(c.norm(), 0.0);
}

TEST_F(Domains, FrameAtKnownPoints) {
  for (const BoundaryGeometry* g : {ball.get(), example.get()}) {
    const ComplexPoint2 p = g == ball.get() ? ComplexPoint2{0.0, 1.0} : origin;
    const LocalFrame f = g->frame_at(p);
    EXPECT_LT(std::abs(f.L.v1 - 1.0), 1e-15);
    EXPECT_LT(std::abs(f.L.v2), 1e-15);
    EXPECT_LT(std::abs(f.N.v1), 1e-15);
    EXPECT_LT(std::abs(f.N.v2 - 1.0), 1e-15);
    EXPECT_LT(std::abs(f.L.dot(f.N)), 1e-15);
  }
  EXPECT_NEAR(example->frame_at(origin).grad_norm, 0.5, 1e-15);
}

TEST_F(Domains, FrameInvariantsAtRandomPoints) {
  const auto points = random_points(1000, 0.7, 101);
  for (const BoundaryGeometry* g : {ball.get(), example.get(), fixed.get()}) {
    const Program l_rho{g->frame().L.apply(g->rho())};
    std::size_t used = 0;
    for (const auto& q : points) {
      if (g->gradient(q).norm() <= g->options().gradient_floor) continue;
      ++used;
      const LocalFrame f = g->frame_at(q);
      EXPECT_LT(std::abs(f.L.dot(f.N)), 1e-10);
      EXPECT_LT(std::abs(f.L.norm() - 1.0), 1e-10);
      EXPECT_LT(std::abs(f.N.norm() - 1.0), 1e-10);
      EXPECT_LT(std::abs(l_rho(q)[0]), 1e-10);
    }
    EXPECT_GT(used, 990u);
  }
}

TEST_F(Domains, DegenerateGradient) {
  EXPECT_THROW(ball->frame_at(origin), DegenerateGradient);
  EXPECT_THROW(project_to_boundary(*ball, origin), DegenerateGradient);
}

TEST(Levi, SpecExamples) {
  const HermitianForm2 id = levi(parse(testkit::kBall), {{0.3, 0.2}, {-0.1, 0.7}});
  EXPECT_EQ(id(1, 1), complex(1.0));
  EXPECT_EQ(id(1, 2), complex(0.0));
  EXPECT_EQ(id(2, 2), complex(1.0));

  const ScalarField rho = parse(testkit::kExample);
  for (complex w : {complex(-0.1), complex(-0.01), complex(0, 0.05), complex(0.3, -0.2)}) {
    const HermitianForm2 h = levi(rho, {0.0, w});
    EXPECT_LT(std::abs(h(1, 1) - (w.real() + std::norm(w))), 1e-12);
    EXPECT_LT(std::abs(h(1, 2)), 1e-12);
    EXPECT_LT(std::abs(h(2, 1)), 1e-12);
    EXPECT_LT(std::abs(h(2, 2) - 1.0), 1e-12);
  }

  const ComplexPoint2 q{{0.4, -0.3}, {0.2, 0.1}};
  const HermitianForm2 h = levi(parse("abs2(z1)^2"), q);
  EXPECT_LT(std::abs(h(1, 1) - 4.0 * std::norm(q.z1)), 1e-14);
  EXPECT_EQ(h(2, 2), complex(0.0));
}

TEST(Levi, AgreesWithFiniteDifferenceHessian) {
  for (const auto& c : testkit::corpus()) {
    const ScalarField f = parse(c.text);
    for (const auto& q : random_points(20, 0.6, 103)) {
      const HermitianForm2 h = levi(f, q);
      const auto ref = fd_hessian(f, q);
      for (int j = 1; j <= 2; ++j) {
        for (int k = 1; k <= 2; ++k) {
          EXPECT_LT(std::abs(h(j, k) - ref[2 * (j - 1) + (k - 1)]), 1e-6 * h.scale()) << c.name;
        }
      }
    }
  }
}

TEST_F(Domains, LeviPairs) {
  const FrameFields fb = ball->frame();
  EXPECT_LT(std::abs(levi_pair(ball->rho(), fb.N, fb.L, {0.0, 1.0})), 1e-15);
  const FrameFields fe = example->frame();
  EXPECT_LT(std::abs(levi_pair(example->rho(), fe.L, fe.L, origin)), 1e-15);
  EXPECT_LT(std::abs(levi_pair(example->rho(), fe.N, fe.N, origin) - 1.0), 1e-15);
  // The sqrt-free fields agree with the normalized frame contraction.
  for (const auto& q : random_points(50, 0.5, 107)) {
    if (example->gradient(q).norm() < 1e-6) continue;
    EXPECT_LT(std::abs(example->levi_LL(q) - levi_pair(example->rho(), fe.L, fe.L, q).real()), 1e-12);
    EXPECT_LT(std::abs(example->levi_NL(q) - levi_pair(example->rho(), fe.N, fe.L, q)), 1e-12);
  }
}

TEST(Hermitian, EigenvaluesAndOuter) {
  const HermitianForm2 h(2.0, complex(1, 1), complex(1, -1), 3.0);
  EXPECT_NEAR(h.min_eigenvalue(), testkit::min_eig(2.0, complex(1, 1), 3.0), 1e-15);
  EXPECT_NEAR(h.min_eigenvalue() + h.max_eigenvalue(), 5.0, 1e-14);
  EXPECT_NEAR(h.min_eigenvalue() * h.max_eigenvalue(), 6.0 - 2.0, 1e-14);
  const ComplexCovector2 c{complex(1, 2), complex(-0.5, 0.3)};
  const HermitianForm2 o = HermitianForm2::outer(c);
  const ComplexVector2 xi{complex(0.2, -0.1), complex(0.7, 0.4)};
  EXPECT_NEAR(o.apply(xi, xi).real(), std::norm(c.apply(xi)), 1e-15);
  EXPECT_NEAR(o.min_eigenvalue(), 0.0, 1e-14);
  EXPECT_NEAR(HermitianForm2::identity().scale(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ((0.1 * HermitianForm2::identity()).scale(), 1.0);
}

TEST(Decompose, RoundTrip) {
  const BoundaryGeometry g(parse(testkit::kExample));
  const auto points = random_points(200, 0.5, 109);
  const auto vectors = random_points(200, 3.0, 113);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LocalFrame f = g.frame_at(points[i]);
    const ComplexVector2 xi{vectors[i].z1, vectors[i].z2};
    const FrameDecomposition d = decompose(xi, f);
    const ComplexVector2 back = d.a * f.L + d.b * f.N;
    EXPECT_LT((back - xi).norm(), 1e-10);
    EXPECT_NEAR(xi.norm2(), std::norm(d.a) + std::norm(d.b), 1e-10 * xi.norm2());
  }
}

TEST_F(Domains, ProjectionExamples) {
  const Projection a = project_to_boundary(*ball, {0.0, 0.5});
  EXPECT_LT(dist(a.p, {0.0, 1.0}), 1e-12);
  EXPECT_NEAR(a.distance, -0.5, 1e-12);

  // Oracle: the normal at the origin is the Re w axis, and ρ(0, t) = t + t² has its root t = 0.
  double lo = -0.005, hi = 0.3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + mid * mid > 0 ? hi : lo) = mid;
  }
  const Projection b = project_to_boundary(*example, {0.0, -0.01});
  EXPECT_LT(dist(b.p, {0.0, lo}), 1e-10);
  EXPECT_GE(std::abs(b.distance), 0.0099);
  EXPECT_LE(std::abs(b.distance), 0.0101);
  EXPECT_LT(b.distance, 0.0);

  const Projection c = project_to_boundary(*ball, {1.0, 0.0});
  EXPECT_EQ(c.p, (ComplexPoint2{1.0, 0.0}));
  EXPECT_EQ(c.distance, 0.0);

  const Projection d = project_to_boundary(*ball, {{0.0, 0.9}, {0.6, 0.0}});
  EXPECT_GT(d.distance, 0.0);
  EXPECT_NEAR(std::sqrt(std::norm(d.p.z1) + std::norm(d.p.z2)), 1.0, 1e-12);
}

TEST_F(Domains, ProjectionContract) {
  for (const BoundaryGeometry* g : {ball.get(), example.get(), fixed.get()}) {
    const double a = g == ball.get() ? 1.2 : 0.2;
    for (const auto& q : random_points(300, a, 127)) {
      Projection pr;
      try {
        pr = project_to_boundary(*g, q);
      } catch (const DegenerateGradient&) {
        continue;
      }
      EXPECT_LE(std::abs(g->value(pr.p)), 1e-10);
      const double rq = g->value(q);
      if (rq != 0.0) EXPECT_EQ(std::signbit(pr.distance), std::signbit(rq));
      EXPECT_NEAR(std::abs(pr.distance), dist(pr.p, q), 1e-12);
      // q - p is parallel to the real normal at p.
      const ComplexVector2 n = g->unit_normal(pr.p);
      const ComplexVector2 v{q.z1 - pr.p.z1, q.z2 - pr.p.z2};
      if (v.norm() > 1e-8) {
        const double cos_angle = std::abs(v.real_dot(n)) / v.norm();
        EXPECT_GT(cos_angle, std::cos(1e-6));
      }
      const Projection again = project_to_boundary(*g, pr.p);
      EXPECT_LE(dist(again.p, pr.p), 1e-10);
      EXPECT_LE(std::abs(again.distance), 1e-10);
    }
  }
}

TEST_F(Domains, ProjectionNonConvergence) {
  ProjectionOptions opts;
  opts.max_iter = 1;
  EXPECT_THROW(project_to_boundary(*ball, {{0.1, 0.2}, {0.3, 0.1}}, opts), NonConvergence);
}

TEST_F(Domains, Classification) {
  EXPECT_EQ(classify(*example, origin), Classification::weak);
  EXPECT_EQ(classify(*ball, {0.0, 1.0}), Classification::strict);
  EXPECT_THROW(classify(*ball, {0.0, 0.5}), NotOnBoundary);

  // Boundary point over z = 0.3: direct Levi-form evaluation is the oracle.
  const Projection pr = project_to_boundary(*example, {0.3, 0.0});
  const ScalarField& rho = example->rho();
  const ComplexCovector2 g = gradient(rho, pr.p);
  const ComplexVector2 L{g.c2 / g.norm(), -g.c1 / g.norm()};
  const double hll = levi(rho, pr.p).apply(L, L).real();
  EXPECT_GT(hll, 1e-3);
  EXPECT_EQ(classify(*example, pr.p), Classification::strict);
}

TEST_F(Domains, Obstruction) {
  EXPECT_NEAR(obstruction(*example, origin), 0.5, 1e-12);
  EXPECT_NEAR(obstruction(*ball, {0.0, 1.0}), 0.0, 1e-14);
  EXPECT_NEAR(obstruction(*fixed, origin), 0.0, 1e-14);
  EXPECT_THROW(obstruction(*example, {0.0, 0.1}), NotOnBoundary);

  // The obstruction along the weak circle z = 0, |w + 1/2| = 1/2 stays at 1/2.
  for (double theta : {0.1, 0.7, 2.0, -1.3}) {
    const complex w = -0.5 + 0.5 * std::exp(complex(0, theta));
    const BoundaryPoint bp = analyze_boundary_point(*example, {0.0, w});
    ASSERT_EQ(bp.classification, Classification::weak);
    EXPECT_NEAR(*bp.obstruction, 0.5, 1e-10);
  }
}

TEST_F(Domains, WeakPointIdentities) {
  for (complex w : {complex(0.0), -0.5 + 0.5 * std::exp(complex(0, 0.4))}) {
    const ComplexPoint2 p{0.0, w};
    const double scale = example->levi(p).scale();
    EXPECT_LE(std::abs(example->levi_NL(p)), 1e-8 * scale);
    EXPECT_LT(std::abs(frame_identity_lhs(*example, p) - obstruction(*example, p)), 1e-8 * scale);
  }
}

TEST_F(Domains, CauchySchwarzAtBoundaryPoints) {
  for (const BoundaryGeometry* g : {ball.get(), example.get(), fixed.get()}) {
    const double a = g == ball.get() ? 1.2 : 0.2;
    for (const auto& q : random_points(200, a, 131)) {
      Projection pr;
      try {
        pr = project_to_boundary(*g, q);
      } catch (const Error&) {
        continue;
      }
      const HermitianForm2 h = g->levi(pr.p);
      if (h.min_eigenvalue() < 0.0) continue;  // only at plurisubharmonic points
      const LocalFrame f = g->frame_at(pr.p);
      const complex hln = h.apply(f.L, f.N);
      EXPECT_LE(std::norm(hln), h.apply(f.L, f.L).real() * h.apply(f.N, f.N).real() + 1e-10);
    }
  }
}

TEST_F(Domains, TaylorNormal) {
  const std::vector<double> depths{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  const TaylorCheck a = taylor_normal_check(example->levi_LL_field(), *example, origin, depths);
  EXPECT_TRUE(a.second_order()) << a.slope;

  const TaylorCheck b = taylor_normal_check(ball->rho(), *ball, {0.0, 1.0}, depths);
  for (std::size_t i = 0; i < depths.size(); ++i) {
    EXPECT_NEAR(b.remainders[i], depths[i] * depths[i], 1e-14);
  }
  EXPECT_NEAR(b.slope, 2.0, 1e-6);

  const TaylorCheck c = taylor_normal_check(ScalarField::constant(4.0), *ball, {0.0, 1.0}, depths);
  for (double r : c.remainders) EXPECT_EQ(r, 0.0);
  EXPECT_TRUE(c.exact);
}

TEST_F(Domains, WeakTangentialLemma) {
  EXPECT_LE(lemma_weak_tangential_check(*example, example->frame().L, origin), 1e-8);
  EXPECT_THROW(lemma_weak_tangential_check(*ball, ball->frame().L, {0.0, 1.0}), PreconditionError);
  const VectorField2 zero{ScalarField::constant(0.0), ScalarField::constant(0.0)};
  EXPECT_EQ(lemma_weak_tangential_check(*example, zero, origin), 0.0);
  // N is not tangential.
  EXPECT_THROW(lemma_weak_tangential_check(*example, example->frame().N, origin), PreconditionError);
}

TEST(BoundaryGeometryTest, RejectsComplexRho) { EXPECT_THROW(BoundaryGeometry(parse("z1")), PreconditionError); }

TEST(BoundaryGeometryTest, ConcurrentThirdOrderAccess) {
  const BoundaryGeometry g(parse(testkit::kExample));
  std::vector<double> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] { results[t] = obstruction(g, {0.0, 0.0}); });
  }
  for (auto& th : threads) th.join();
  for (double r : results) EXPECT_NEAR(r, 0.5, 1e-12);
}
