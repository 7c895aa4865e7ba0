#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "pshkit/geometry.hpp"
#include "pshkit/transforms.hpp"

namespace pshkit {

/// Axis-aligned box in R^4 = C^2, ordered (Re z1, Im z1, Re z2, Im z2).
struct Box {
  std::array<std::pair<double, double>, 4> ranges{};

  bool valid() const;
  bool contains(const ComplexPoint2& q, double slack = 0.0) const;
  double diameter() const;
  ComplexPoint2 at(const std::array<double, 4>& unit) const;

  static Box cube(double lo, double hi) { return {{{{lo, hi}, {lo, hi}, {lo, hi}, {lo, hi}}}}; }
};

/// Halton points in [0,1)^4 (bases 2, 3, 5, 7) with a seeded Cranley-Patterson
/// rotation. Deterministic for a fixed seed.
class HaltonSequence {
 public:
  explicit HaltonSequence(std::uint64_t seed);
  std::array<double, 4> next();

 private:
  std::array<double, 4> shift_{};
  std::uint64_t index_ = 0;
};

struct BoundarySamplingOptions {
  ProjectionOptions projection;
  /// Draw cap, as a multiple of the requested count.
  std::size_t max_draw_factor = 16;
};

/// n boundary points: Halton seeds in the box, projected onto bΩ, kept when the
/// projection converges and lands inside the box. Throws UndersamplingError if
/// fewer than half of the first n seeds are accepted, or if n points are not
/// reached within the draw cap.
std::vector<BoundaryPoint> sample_boundary(const BoundaryGeometry& geom, const Box& box, std::size_t n,
                                           std::uint64_t seed, BoundarySamplingOptions opts = {});

struct WeakSearchOptions {
  /// Samples with H(L,L) below this fraction of their Hessian scale are refined.
  double candidate_ratio = 0.1;
  /// The lowest-H(L,L) samples refined regardless of the ratio.
  std::size_t always_refine = 8;
  std::size_t max_candidates = 64;
  /// Extra seeds drawn around each weak point found.
  std::size_t densify_factor = 4;
  /// Radius of the densification neighbourhood, as a fraction of the box diameter.
  double densify_radius = 0.02;
  int max_descent_steps = 200;
  std::uint64_t seed = 0x5eed;
};

/// Minimizes H_ρ(L,L) over bΩ from p by projected gradient descent with a
/// Polyak step (the minimum on a weak set is 0). Returns the analyzed end point.
BoundaryPoint descend_levi_LL(const BoundaryGeometry& geom, const BoundaryPoint& start, int max_steps = 200);

/// Weak points found by descending from the lowest-H(L,L) samples, followed by
/// re-sampling around each weak point at densify_factor times the base density.
/// Only points inside the box are returned.
std::vector<BoundaryPoint> search_weak_points(const BoundaryGeometry& geom, const Box& box,
                                              const std::vector<BoundaryPoint>& samples,
                                              WeakSearchOptions opts = {});

/// q = p - depth n_p (interior) or p + depth n_p (exterior), for every boundary
/// point and depth. Each q is reprojected; a foot point off by more than
/// 1e-6 * depth raises PreconditionError (collar wider than the reach).
std::vector<CollarSample> sample_collar(const BoundaryGeometry& geom, const std::vector<BoundaryPoint>& boundary,
                                        const std::vector<double>& depths, Side side);

struct SampleSet {
  std::vector<BoundaryPoint> boundary;
  std::vector<CollarSample> collar_in;
  std::vector<CollarSample> collar_out;
  std::vector<ComplexPoint2> region;

  std::size_t weak_count() const;
  std::vector<double> weak_obstructions() const;
};

struct SamplingPlan {
  Box box;
  std::size_t n_boundary = 1000;
  std::vector<double> depths{1e-4, 3.1622776601683794e-4, 1e-3, 3.1622776601683794e-3, 1e-2};
  std::uint64_t seed = 1;
  bool search_weak = true;
  WeakSearchOptions weak;
};

/// Boundary samples (with weak-point search) and both collars.
SampleSet build_samples(const BoundaryGeometry& geom, const SamplingPlan& plan);

}  // namespace pshkit
