#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace pshkit::detail {

enum class Op : std::uint8_t { constant, variable, add, mul, div, ipow, rpow, exp, sqrt };

// Variable slots: 0 = z1, 1 = z2, 2 = conj(z1), 3 = conj(z2).
struct Node {
  Op op = Op::constant;
  std::uint8_t var = 0;
  std::int32_t k = 0;
  double x = 0.0;
  std::complex<double> c{};
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

/// Copies of every node reachable from `roots`, in ascending id order (a
/// topological order, since children are always interned before parents),
/// with child references rewritten as positions in the returned vector.
/// `root_slots` receives the position of each root.
std::vector<Node> linearize(const std::vector<std::uint32_t>& roots,
                            std::vector<std::uint32_t>& root_slots);

}  // namespace pshkit::detail
