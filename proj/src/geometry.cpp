#include "pshkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pshkit/errors.hpp"

namespace pshkit {

using W = Wirtinger;

namespace {

struct Derivs {
  ScalarField g1, g2;          // ρ_{z1}, ρ_{z2}
  ScalarField gb1, gb2;        // ρ_{z̄1}, ρ_{z̄2}
  ScalarField h11, h12, h21, h22;  // ρ_{z_j z̄_k}
};

Derivs derivatives(const ScalarField& f) {
  Derivs d;
  d.g1 = wirtinger(f, W::dz1);
  d.g2 = wirtinger(f, W::dz2);
  d.gb1 = wirtinger(f, W::dzbar1);
  d.gb2 = wirtinger(f, W::dzbar2);
  d.h11 = wirtinger(d.g1, W::dzbar1);
  d.h12 = wirtinger(d.g1, W::dzbar2);
  d.h21 = wirtinger(d.g2, W::dzbar1);
  d.h22 = wirtinger(d.g2, W::dzbar2);
  return d;
}

// Σ h_{jk̄} x_j y_k, with y already conjugated by the caller.
ScalarField contract(const Derivs& d, const ScalarField& x1, const ScalarField& x2, const ScalarField& y1bar,
                     const ScalarField& y2bar) {
  return d.h11 * x1 * y1bar + d.h12 * x1 * y2bar + d.h21 * x2 * y1bar + d.h22 * x2 * y2bar;
}

void require_real(const ScalarField& rho) {
  if (!rho.real_valued()) throw PreconditionError("defining function must be a real-valued field");
}

complex eval1(const Program& p, const ComplexPoint2& q, std::size_t root, std::vector<complex>& buf) {
  buf.resize(p.root_count());
  p.evaluate(q, buf);
  return buf[root];
}

}  // namespace

const char* to_string(Classification c) { return c == Classification::weak ? "weak" : "strict"; }

FrameFields frame(const ScalarField& rho) {
  Derivs d = derivatives(rho);
  ScalarField norm = sqrt((d.g1 * d.gb1 + d.g2 * d.gb2).assume_real());
  FrameFields f;
  f.L = {d.g2 / norm, -d.g1 / norm};
  f.N = {d.gb1 / norm, d.gb2 / norm};
  return f;
}

ScalarField levi_field(const ScalarField& f, const VectorField2& X, const VectorField2& Y) {
  Derivs d = derivatives(f);
  return contract(d, X.c1, X.c2, conj(Y.c1), conj(Y.c2));
}

// ---------------------------------------------------------------------------

HessianJet::HessianJet(const ScalarField& f) {
  Derivs d = derivatives(f);
  program_ = Program({f, d.g1, d.g2, d.h11, d.h12, d.h21, d.h22});
}

HessianJet::Value HessianJet::operator()(const ComplexPoint2& q) const {
  std::array<complex, 7> v;
  program_.evaluate(q, v);
  return {v[0], {v[1], v[2]}, HermitianForm2(v[3], v[4], v[5], v[6])};
}

ComplexCovector2 gradient(const ScalarField& f, const ComplexPoint2& q) {
  Program p({wirtinger(f, W::dz1), wirtinger(f, W::dz2)});
  auto v = p(q);
  return {v[0], v[1]};
}

HermitianForm2 levi(const ScalarField& f, const ComplexPoint2& q) { return HessianJet(f)(q).levi; }

complex levi_pair(const ScalarField& f, const VectorField2& X, const VectorField2& Y, const ComplexPoint2& q) {
  Program p({X.c1, X.c2, Y.c1, Y.c2});
  auto v = p(q);
  return levi(f, q).apply({v[0], v[1]}, {v[2], v[3]});
}

FrameDecomposition decompose(const ComplexVector2& xi, const LocalFrame& frame) {
  return {xi.dot(frame.L), xi.dot(frame.N)};
}

// ---------------------------------------------------------------------------

BoundaryGeometry::BoundaryGeometry(ScalarField rho, GeometryOptions opts) : rho_(rho), opts_(opts) {
  require_real(rho_);
  Derivs d = derivatives(rho_);
  grad_norm2_ = (d.g1 * d.gb1 + d.g2 * d.gb2).assume_real();
  frame_ = pshkit::frame(rho_);
  // L̃ = (ρ_{z2}, -ρ_{z1}), Ñ = (ρ_{z̄1}, ρ_{z̄2}); conj(L̃) = (ρ_{z̄2}, -ρ_{z̄1}).
  levi_LL_ = (contract(d, d.g2, -d.g1, d.gb2, -d.gb1) / grad_norm2_).assume_real();
  levi_NL_ = contract(d, d.gb1, d.gb2, d.gb2, -d.gb1) / grad_norm2_;
  first_ = Program({rho_, d.g1, d.g2});
  second_ = Program({d.h11, d.h12, d.h21, d.h22, levi_LL_, levi_NL_});
}

BoundaryGeometry::~BoundaryGeometry() = default;

const Program& BoundaryGeometry::third_order() const {
  std::call_once(third_once_, [this] {
    third_ = std::make_unique<Program>(std::initializer_list<ScalarField>{
        wirtinger(levi_LL_, W::dz1), wirtinger(levi_LL_, W::dz2), wirtinger(levi_NL_, W::dz1),
        wirtinger(levi_NL_, W::dz2)});
  });
  return *third_;
}

double BoundaryGeometry::value(const ComplexPoint2& q) const {
  std::vector<complex> buf;
  return eval1(first_, q, 0, buf).real();
}

ComplexCovector2 BoundaryGeometry::gradient(const ComplexPoint2& q) const {
  std::array<complex, 3> v;
  first_.evaluate(q, v);
  return {v[1], v[2]};
}

LocalFrame BoundaryGeometry::frame_at(const ComplexPoint2& q) const {
  ComplexCovector2 g = gradient(q);
  const double n = g.norm();
  if (!(n > opts_.gradient_floor)) {
    throw DegenerateGradient("|∂ρ| below floor at (" + std::to_string(q.z1.real()) + "," +
                             std::to_string(q.z1.imag()) + "," + std::to_string(q.z2.real()) + "," +
                             std::to_string(q.z2.imag()) + ")");
  }
  LocalFrame f;
  f.L = {g.c2 / n, -g.c1 / n};
  f.N = {std::conj(g.c1) / n, std::conj(g.c2) / n};
  f.grad_norm = n;
  return f;
}

HermitianForm2 BoundaryGeometry::levi(const ComplexPoint2& q) const {
  std::array<complex, 6> v;
  second_.evaluate(q, v);
  return {v[0], v[1], v[2], v[3]};
}

double BoundaryGeometry::levi_LL(const ComplexPoint2& q) const {
  std::array<complex, 6> v;
  second_.evaluate(q, v);
  return v[4].real();
}

complex BoundaryGeometry::levi_NL(const ComplexPoint2& q) const {
  std::array<complex, 6> v;
  second_.evaluate(q, v);
  return v[5];
}

ComplexCovector2 BoundaryGeometry::d_levi_LL(const ComplexPoint2& q) const {
  std::array<complex, 4> v;
  third_order().evaluate(q, v);
  return {v[0], v[1]};
}

ComplexCovector2 BoundaryGeometry::d_levi_NL(const ComplexPoint2& q) const {
  std::array<complex, 4> v;
  third_order().evaluate(q, v);
  return {v[2], v[3]};
}

// ---------------------------------------------------------------------------
// Normal projection

namespace {

ComplexPoint2 step_along(const ComplexPoint2& q, const ComplexVector2& n, double t) {
  return {q.z1 - t * n.v1, q.z2 - t * n.v2};
}

double distance(const ComplexPoint2& a, const ComplexPoint2& b) {
  return std::sqrt(std::norm(a.z1 - b.z1) + std::norm(a.z2 - b.z2));
}

// Root of φ(t) = ρ(q - t n) near t0. φ'(t) = -2 Re Σ ρ_{z_j}(q - t n) n_j.
double solve_line(const BoundaryGeometry& geom, const ComplexPoint2& q, const ComplexVector2& n, double t0,
                  double tol) {
  double t = t0;
  std::optional<double> t_neg, t_pos;  // parameters with φ < 0 and φ > 0
  auto phi_at = [&](double s, ComplexCovector2* grad) {
    ComplexPoint2 x = step_along(q, n, s);
    if (grad) *grad = geom.gradient(x);
    return geom.value(x);
  };
  ComplexCovector2 g;
  double phi = phi_at(t, &g);
  for (int it = 0; it < 100; ++it) {
    if (phi < 0) t_neg = t;
    if (phi > 0) t_pos = t;
    if (std::abs(phi) <= 0.01 * tol) return t;
    const double dphi = -2.0 * (g.c1 * n.v1 + g.c2 * n.v2).real();
    const bool bracketed = t_neg && t_pos;
    double next;
    if (dphi != 0.0 && std::isfinite(dphi)) {
      next = t - phi / dphi;
    } else if (bracketed) {
      next = 0.5 * (*t_neg + *t_pos);
    } else {
      throw DegenerateGradient("normal derivative of ρ vanishes along the projection line");
    }
    if (bracketed) {
      const double lo = std::min(*t_neg, *t_pos), hi = std::max(*t_neg, *t_pos);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    ComplexCovector2 g_next;
    double phi_next = phi_at(next, &g_next);
    if (!bracketed) {
      // Damping: halve the Newton step until |φ| decreases or a sign change appears.
      int halvings = 0;
      while (std::abs(phi_next) > std::abs(phi) && (phi_next > 0) == (phi > 0) && halvings < 40) {
        next = t + 0.5 * (next - t);
        phi_next = phi_at(next, &g_next);
        ++halvings;
      }
    }
    const double change = std::abs(next - t);
    t = next;
    phi = phi_next;
    g = g_next;
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(t))) break;
  }
  if (std::abs(phi) > tol) throw NonConvergence("line search for the boundary did not converge");
  return t;
}

}  // namespace

Projection project_to_boundary(const BoundaryGeometry& geom, const ComplexPoint2& q, ProjectionOptions opts) {
  const double rq = geom.value(q);
  LocalFrame fq = geom.frame_at(q);
  if (std::abs(rq) <= 0.01 * opts.tol) return {q, 0.0, 0};
  ComplexVector2 n = fq.N;
  double t = rq / (2.0 * fq.grad_norm);
  ComplexPoint2 p = q;
  double last_move = std::numeric_limits<double>::infinity();
  int stalls = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    t = solve_line(geom, q, n, t, opts.tol);
    ComplexPoint2 next = step_along(q, n, t);
    const double move = distance(next, p);
    p = next;
    n = geom.frame_at(p).N;
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(q.z1) + std::abs(q.z2));
    if (move <= floor) return {p, t, it};
    // Linear convergence has bottomed out at rounding level.
    if (move >= last_move && move < 1e3 * floor) {
      if (++stalls >= 3) return {p, t, it};
    }
    last_move = move;
  }
  throw NonConvergence("normal projection did not converge within " + std::to_string(opts.max_iter) +
                       " iterations");
}

// ---------------------------------------------------------------------------

namespace {

void require_on_boundary(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  const double r = geom.value(p);
  if (!(std::abs(r) <= geom.options().boundary_tol)) {
    throw NotOnBoundary("|ρ(p)| = " + std::to_string(std::abs(r)) + " exceeds the boundary tolerance");
  }
}

}  // namespace

Classification classify(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  require_on_boundary(geom, p);
  const double scale = geom.levi(p).scale();
  return geom.levi_LL(p) < geom.options().tau_weak * scale ? Classification::weak : Classification::strict;
}

namespace {

complex obstruction_complex(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  LocalFrame f = geom.frame_at(p);
  ComplexCovector2 d = geom.d_levi_LL(p);
  return f.N.v1 * d.c1 + f.N.v2 * d.c2;
}

}  // namespace

double obstruction(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  const Classification c = classify(geom, p);
  const complex a = obstruction_complex(geom, p);
  if (c == Classification::weak && std::abs(a.imag()) > 1e-10 * geom.levi(p).scale()) {
    throw Error("N H(L,L) has imaginary part " + std::to_string(a.imag()) + " at a weak point");
  }
  return a.real();
}

complex frame_identity_lhs(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  LocalFrame f = geom.frame_at(p);
  ComplexCovector2 d = geom.d_levi_NL(p);
  return f.L.v1 * d.c1 + f.L.v2 * d.c2;
}

BoundaryPoint analyze_boundary_point(const BoundaryGeometry& geom, const ComplexPoint2& p) {
  require_on_boundary(geom, p);
  BoundaryPoint bp;
  bp.p = p;
  bp.rho = geom.value(p);
  bp.grad = geom.gradient(p);
  if (!(bp.grad.norm() > geom.options().gradient_floor)) throw DegenerateGradient("|∂ρ| below floor on bΩ");
  bp.levi_LL = geom.levi_LL(p);
  bp.levi_NL = geom.levi_NL(p);
  bp.hessian_scale = geom.levi(p).scale();
  bp.classification =
      bp.levi_LL < geom.options().tau_weak * bp.hessian_scale ? Classification::weak : Classification::strict;
  if (bp.classification == Classification::weak) bp.obstruction = obstruction(geom, p);
  return bp;
}

TaylorCheck taylor_normal_check(const ScalarField& f, const BoundaryGeometry& geom, const ComplexPoint2& p,
                                const std::vector<double>& depths) {
  require_on_boundary(geom, p);
  for (double d : depths) {
    if (!(d > 0.0)) throw PreconditionError("Taylor depths must be positive");
  }
  Program prog({f, wirtinger(f, W::dz1), wirtinger(f, W::dz2)});
  LocalFrame fr = geom.frame_at(p);
  auto at_p = prog(p);
  const double f_p = at_p[0].real();
  const double re_nf = (fr.N.v1 * at_p[1] + fr.N.v2 * at_p[2]).real();
  TaylorCheck out;
  out.depths = depths;
  std::vector<double> xs, ys;
  for (double d : depths) {
    ComplexPoint2 q{p.z1 - d * fr.N.v1, p.z2 - d * fr.N.v2};
    const double fq = prog(q)[0].real();
    const double rem = std::abs(fq - f_p + 2.0 * d * re_nf);
    out.remainders.push_back(rem);
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f_p) + std::abs(fq));
    if (rem > noise) {
      xs.push_back(std::log(d));
      ys.push_back(std::log(rem));
    }
  }
  if (xs.size() < 2) {
    out.exact = true;
    out.slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  out.slope = sxy / sxx;
  return out;
}

double lemma_weak_tangential_check(const BoundaryGeometry& geom, const VectorField2& X, const ComplexPoint2& p) {
  if (classify(geom, p) != Classification::weak) {
    throw PreconditionError("lemma check requires a weakly pseudoconvex boundary point");
  }
  Program prog({X.c1, X.c2, wirtinger(X.c1, W::dzbar1), wirtinger(X.c1, W::dzbar2), wirtinger(X.c2, W::dzbar1),
                wirtinger(X.c2, W::dzbar2)});
  auto v = prog(p);
  const ComplexCovector2 g = geom.gradient(p);
  const double scale = geom.levi(p).scale();
  const complex x_rho = g.apply({v[0], v[1]});
  if (std::abs(x_rho) > 1e-10 * scale) throw PreconditionError("X is not complex tangential at p");
  // Y_k = Σ_j conj(X_j) ∂X_k/∂z̄_j
  const complex y1 = std::conj(v[0]) * v[2] + std::conj(v[1]) * v[3];
  const complex y2 = std::conj(v[0]) * v[4] + std::conj(v[1]) * v[5];
  return std::abs(g.apply({y1, y2}));
}

}  // namespace pshkit
