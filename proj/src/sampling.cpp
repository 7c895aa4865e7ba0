#include "pshkit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pshkit/errors.hpp"

namespace pshkit {

bool Box::valid() const {
  return std::all_of(ranges.begin(), ranges.end(), [](const auto& r) {
    return std::isfinite(r.first) && std::isfinite(r.second) && r.first < r.second;
  });
}

bool Box::contains(const ComplexPoint2& q, double slack) const {
  const double c[4] = {q.z1.real(), q.z1.imag(), q.z2.real(), q.z2.imag()};
  for (int i = 0; i < 4; ++i) {
    if (c[i] < ranges[i].first - slack || c[i] > ranges[i].second + slack) return false;
  }
  return true;
}

double Box::diameter() const {
  double s = 0.0;
  for (const auto& r : ranges) s += (r.second - r.first) * (r.second - r.first);
  return std::sqrt(s);
}

ComplexPoint2 Box::at(const std::array<double, 4>& u) const {
  double c[4];
  for (int i = 0; i < 4; ++i) c[i] = ranges[i].first + u[i] * (ranges[i].second - ranges[i].first);
  return {{c[0], c[1]}, {c[2], c[3]}};
}

HaltonSequence::HaltonSequence(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (double& s : shift_) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::array<double, 4> HaltonSequence::next() {
  static constexpr std::uint64_t bases[4] = {2, 3, 5, 7};
  ++index_;
  std::array<double, 4> out{};
  for (int d = 0; d < 4; ++d) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t i = index_; i > 0; i /= bases[d]) {
      f /= static_cast<double>(bases[d]);
      r += f * static_cast<double>(i % bases[d]);
    }
    double v = r + shift_[d];
    out[d] = v >= 1.0 ? v - 1.0 : v;
  }
  return out;
}

std::vector<BoundaryPoint> sample_boundary(const BoundaryGeometry& geom, const Box& box, std::size_t n,
                                           std::uint64_t seed, BoundarySamplingOptions opts) {
  if (!box.valid()) throw PreconditionError("sampling box is empty or not finite");
  HaltonSequence seq(seed);
  std::vector<BoundaryPoint> out;
  out.reserve(n);
  std::size_t draws = 0, accepted_in_first_n = 0;
  const std::size_t cap = std::max<std::size_t>(opts.max_draw_factor * n, n);
  while (out.size() < n && draws < cap) {
    const ComplexPoint2 seed_point = box.at(seq.next());
    ++draws;
    try {
      Projection proj = project_to_boundary(geom, seed_point, opts.projection);
      if (box.contains(proj.p)) {
        out.push_back(analyze_boundary_point(geom, proj.p));
        if (draws <= n) ++accepted_in_first_n;
      }
    } catch (const Error&) {
      // Seed outside the projection's basin; skipped.
    }
    if (draws == n && 2 * accepted_in_first_n < n) {
      throw UndersamplingError("only " + std::to_string(accepted_in_first_n) + " of " + std::to_string(n) +
                               " seeds projected onto bΩ inside the box");
    }
  }
  if (out.size() < n) {
    throw UndersamplingError("reached " + std::to_string(out.size()) + " of " + std::to_string(n) +
                             " boundary samples within the draw cap");
  }
  return out;
}

namespace {

double dist(const ComplexPoint2& a, const ComplexPoint2& b) {
  return std::sqrt(std::norm(a.z1 - b.z1) + std::norm(a.z2 - b.z2));
}

}  // namespace

BoundaryPoint descend_levi_LL(const BoundaryGeometry& geom, const BoundaryPoint& start, int max_steps) {
  BoundaryPoint cur = start;
  for (int step = 0; step < max_steps; ++step) {
    const double f = cur.levi_LL;
    if (f <= 1e-15 * cur.hessian_scale) break;
    const ComplexCovector2 g = geom.d_levi_LL(cur.p);
    // Euclidean gradient of the real function H(L,L) is 2 ∂̄H = 2 conj(∂H).
    const ComplexVector2 grad{2.0 * std::conj(g.c1), 2.0 * std::conj(g.c2)};
    const ComplexVector2 n = geom.unit_normal(cur.p);
    const ComplexVector2 tangent = grad - grad.real_dot(n) * n;
    const double t2 = tangent.norm2();
    if (!(t2 > 1e-30)) break;
    double alpha = 2.0 * f / t2;
    bool moved = false;
    for (int halving = 0; halving < 40 && !moved; ++halving, alpha *= 0.5) {
      const ComplexPoint2 trial{cur.p.z1 - alpha * tangent.v1, cur.p.z2 - alpha * tangent.v2};
      try {
        const Projection proj = project_to_boundary(geom, trial);
        const double f_new = geom.levi_LL(proj.p);
        if (f_new < f - 1e-4 * alpha * t2) {
          cur.p = proj.p;
          cur.levi_LL = f_new;
          cur.hessian_scale = geom.levi(proj.p).scale();
          moved = true;
        }
      } catch (const Error&) {
      }
    }
    if (!moved) break;
  }
  return analyze_boundary_point(geom, cur.p);
}

std::vector<BoundaryPoint> search_weak_points(const BoundaryGeometry& geom, const Box& box,
                                              const std::vector<BoundaryPoint>& samples, WeakSearchOptions opts) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](std::size_t i) { return samples[i].levi_LL / samples[i].hessian_scale; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) < ratio(b); });

  std::vector<BoundaryPoint> found;
  auto add_if_new = [&](const BoundaryPoint& bp) {
    if (bp.classification != Classification::weak || !box.contains(bp.p)) return false;
    for (const BoundaryPoint& w : found) {
      if (dist(w.p, bp.p) < 1e-9) return false;
    }
    found.push_back(bp);
    return true;
  };

  for (std::size_t rank = 0; rank < order.size() && rank < opts.max_candidates; ++rank) {
    const std::size_t i = order[rank];
    if (rank >= opts.always_refine && ratio(i) >= opts.candidate_ratio) break;
    try {
      add_if_new(descend_levi_LL(geom, samples[i], opts.max_descent_steps));
    } catch (const Error&) {
    }
  }

  const double radius = opts.densify_radius * box.diameter();
  HaltonSequence seq(opts.seed);
  const std::size_t initial = found.size();
  for (std::size_t w = 0; w < initial; ++w) {
    const ComplexPoint2 centre = found[w].p;
    for (std::size_t k = 0; k < opts.densify_factor; ++k) {
      const auto u = seq.next();
      const ComplexPoint2 seed_point{centre.z1 + radius * complex(2 * u[0] - 1, 2 * u[1] - 1),
                                     centre.z2 + radius * complex(2 * u[2] - 1, 2 * u[3] - 1)};
      try {
        const Projection proj = project_to_boundary(geom, seed_point);
        if (!box.contains(proj.p)) continue;
        add_if_new(descend_levi_LL(geom, analyze_boundary_point(geom, proj.p), opts.max_descent_steps));
      } catch (const Error&) {
      }
    }
  }
  return found;
}

std::vector<CollarSample> sample_collar(const BoundaryGeometry& geom, const std::vector<BoundaryPoint>& boundary,
                                        const std::vector<double>& depths, Side side) {
  for (double d : depths) {
    if (!(d > 0.0)) throw PreconditionError("collar depths must be positive");
  }
  const double sign = side == Side::interior ? 1.0 : -1.0;
  std::vector<CollarSample> out;
  out.reserve(boundary.size() * depths.size());
  for (const BoundaryPoint& bp : boundary) {
    const ComplexVector2 n = geom.unit_normal(bp.p);
    for (double depth : depths) {
      CollarSample s;
      s.p = bp.p;
      s.q = {bp.p.z1 - sign * depth * n.v1, bp.p.z2 - sign * depth * n.v2};
      s.d = -sign * depth;
      const Projection back = project_to_boundary(geom, s.q);
      if (dist(back.p, bp.p) > 1e-6 * depth) {
        throw PreconditionError("collar reprojection mismatch at depth " + std::to_string(depth) +
                                ": collar wider than the normal projection's reach");
      }
      out.push_back(s);
    }
  }
  return out;
}

std::size_t SampleSet::weak_count() const {
  return static_cast<std::size_t>(std::count_if(boundary.begin(), boundary.end(), [](const BoundaryPoint& bp) {
    return bp.classification == Classification::weak;
  }));
}

std::vector<double> SampleSet::weak_obstructions() const {
  std::vector<double> out;
  for (const BoundaryPoint& bp : boundary) {
    if (bp.classification == Classification::weak && bp.obstruction) out.push_back(*bp.obstruction);
  }
  return out;
}

SampleSet build_samples(const BoundaryGeometry& geom, const SamplingPlan& plan) {
  SampleSet s;
  s.boundary = sample_boundary(geom, plan.box, plan.n_boundary, plan.seed);
  if (plan.search_weak) {
    WeakSearchOptions weak = plan.weak;
    weak.seed = plan.seed ^ 0x9e3779b97f4a7c15ull;
    for (BoundaryPoint& bp : search_weak_points(geom, plan.box, s.boundary, weak)) s.boundary.push_back(bp);
  }
  s.collar_in = sample_collar(geom, s.boundary, plan.depths, Side::interior);
  s.collar_out = sample_collar(geom, s.boundary, plan.depths, Side::exterior);
  return s;
}

}  // namespace pshkit
