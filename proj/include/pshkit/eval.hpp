#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "pshkit/detail/node.hpp"
#include "pshkit/expr.hpp"

namespace pshkit {

struct EvalOptions {
  /// Divisors with modulus below this raise EvalError::division_by_zero.
  double division_floor = 1e-300;
  /// sqrt arguments with modulus below this raise EvalError::sqrt_branch.
  double sqrt_floor = 1e-12;
};

/// A set of fields flattened into one straight-line tape. Shared subterms are
/// evaluated once per call; the tape itself is immutable, so one Program can
/// be evaluated from several threads.
class Program {
 public:
  Program() = default;
  explicit Program(std::span<const ScalarField> roots, EvalOptions opts = {});
  Program(std::initializer_list<ScalarField> roots, EvalOptions opts = {})
      : Program(std::span<const ScalarField>(roots.begin(), roots.size()), opts) {}

  std::size_t tape_size() const noexcept { return tape_.size(); }
  std::size_t root_count() const noexcept { return roots_.size(); }

  /// Writes one value per root into `out` (size root_count()).
  void evaluate(const ComplexPoint2& q, std::span<complex> out) const;
  std::vector<complex> operator()(const ComplexPoint2& q) const;

 private:
  std::vector<detail::Node> tape_;
  std::vector<std::uint32_t> roots_;
  EvalOptions opts_;
};

complex eval(const ScalarField& f, const ComplexPoint2& q, EvalOptions opts = {});

}  // namespace pshkit
