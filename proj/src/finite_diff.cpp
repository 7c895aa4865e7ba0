#include "pshkit/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pshkit/errors.hpp"

namespace pshkit {
namespace {

complex value_at(const Program& f, const ComplexPoint2& q) {
  complex out;
  f.evaluate(q, std::span<complex>(&out, 1));
  return out;
}

complex nested(const Program& f, std::span<const Wirtinger> seq, const ComplexPoint2& q, double h) {
  if (seq.empty()) return value_at(f, q);
  const Wirtinger s = seq.front();
  const auto rest = seq.subspan(1);
  const int coord = static_cast<int>(s) % 2;
  const bool barred = static_cast<int>(s) >= 2;
  auto shifted = [&](complex delta) {
    ComplexPoint2 p = q;
    (coord == 0 ? p.z1 : p.z2) += delta;
    return nested(f, rest, p, h);
  };
  const complex dx = (shifted(h) - shifted(-h)) / (2.0 * h);
  const complex dy = (shifted(complex(0.0, h)) - shifted(complex(0.0, -h))) / (2.0 * h);
  const complex i(0.0, 1.0);
  return barred ? 0.5 * (dx + i * dy) : 0.5 * (dx - i * dy);
}

}  // namespace

complex fd_wirtinger(const Program& f, const WirtingerIndex& idx, const ComplexPoint2& q, double h) {
  auto seq = idx.sequence();
  return nested(f, seq, q, h);
}

FdCheck fd_check(const ScalarField& f, const WirtingerIndex& idx, const ComplexPoint2& q, double h) {
  if (idx.order() > 3) throw PreconditionError("fd_check supports Wirtinger orders up to 3");
  if (!(h >= 1e-6 && h <= 1e-2)) throw PreconditionError("fd_check step must lie in [1e-6, 1e-2]");
  Program values({f});
  FdCheck out;
  out.symbolic = eval(wirtinger(f, idx), q);
  out.numeric = fd_wirtinger(values, idx, q, h);
  out.discrepancy = std::abs(out.symbolic - out.numeric);
  return out;
}

FdConvergence fd_convergence(const ScalarField& f, const WirtingerIndex& idx, const ComplexPoint2& q,
                             const std::vector<double>& steps) {
  Program values({f});
  const complex symbolic = eval(wirtinger(f, idx), q);
  const int order = idx.order();
  FdConvergence out;
  out.steps = steps;
  for (double h : steps) {
    const complex numeric = fd_wirtinger(values, idx, q, h);
    // Magnitude of f over the stencil sets the rounding level.
    double scale = std::abs(value_at(values, q));
    for (complex d : {complex(1, 0), complex(-1, 0), complex(0, 1), complex(0, -1)}) {
      const double reach = order * h;
      scale = std::max(scale, std::abs(value_at(values, {q.z1 + reach * d, q.z2})));
      scale = std::max(scale, std::abs(value_at(values, {q.z1, q.z2 + reach * d})));
    }
    out.discrepancies.push_back(std::abs(symbolic - numeric));
    out.noise.push_back(100.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale) / std::pow(h, order));
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (out.discrepancies[i] > 10.0 * out.noise[i]) {
      xs.push_back(std::log(steps[i]));
      ys.push_back(std::log(out.discrepancies[i]));
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
  my /= ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  out.slope = sxy / sxx;
  return out;
}

}  // namespace pshkit
