#include "pshkit/eval.hpp"

#include <cmath>
#include <string>

#include "pshkit/errors.hpp"

namespace pshkit {

using detail::Op;

Program::Program(std::span<const ScalarField> roots, EvalOptions opts) : opts_(opts) {
  std::vector<std::uint32_t> ids;
  ids.reserve(roots.size());
  for (const ScalarField& f : roots) ids.push_back(f.id());
  tape_ = detail::linearize(ids, roots_);
}

namespace {

complex int_power(complex base, int k, double floor) {
  complex result(1.0);
  bool invert = k < 0;
  unsigned e = static_cast<unsigned>(invert ? -static_cast<long>(k) : k);
  while (e) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1;
  }
  if (invert) {
    if (std::abs(result) < floor) throw EvalError(EvalError::Kind::division_by_zero, "negative power of a vanishing base");
    return 1.0 / result;
  }
  return result;
}

}  // namespace

void Program::evaluate(const ComplexPoint2& q, std::span<complex> out) const {
  std::vector<complex> v(tape_.size());
  const complex vars[4] = {q.z1, q.z2, std::conj(q.z1), std::conj(q.z2)};
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const detail::Node& n = tape_[i];
    switch (n.op) {
      case Op::constant: v[i] = n.c; break;
      case Op::variable: v[i] = vars[n.var]; break;
      case Op::add: v[i] = v[n.a] + v[n.b]; break;
      case Op::mul: v[i] = v[n.a] * v[n.b]; break;
      case Op::div:
        if (std::abs(v[n.b]) < opts_.division_floor) {
          throw EvalError(EvalError::Kind::division_by_zero, "division by a vanishing value");
        }
        v[i] = v[n.a] / v[n.b];
        break;
      case Op::ipow: v[i] = int_power(v[n.a], n.k, opts_.division_floor); break;
      case Op::rpow: {
        const complex base = v[n.a];
        if (!(base.real() > 0.0) || std::abs(base.imag()) > 1e-10 * (1.0 + base.real())) {
          throw EvalError(EvalError::Kind::power_domain,
                          "real power of a base that is not positive real (evaluated on the wrong side?)");
        }
        v[i] = std::pow(base.real(), n.x);
        break;
      }
      case Op::exp: v[i] = std::exp(v[n.a]); break;
      case Op::sqrt:
        if (std::abs(v[n.a]) < opts_.sqrt_floor) {
          throw EvalError(EvalError::Kind::sqrt_branch, "sqrt argument below the nonvanishing floor");
        }
        v[i] = std::sqrt(v[n.a]);
        break;
    }
  }
  for (std::size_t r = 0; r < roots_.size(); ++r) {
    const complex x = v[roots_[r]];
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
      throw EvalError(EvalError::Kind::non_finite, "non-finite value");
    }
    out[r] = x;
  }
}

std::vector<complex> Program::operator()(const ComplexPoint2& q) const {
  std::vector<complex> out(roots_.size());
  evaluate(q, out);
  return out;
}

complex eval(const ScalarField& f, const ComplexPoint2& q, EvalOptions opts) {
  Program p({f}, opts);
  complex out;
  p.evaluate(q, std::span<complex>(&out, 1));
  return out;
}

}  // namespace pshkit
