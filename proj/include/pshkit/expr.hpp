#pragma once

// Symbolic scalar fields on C^2 with exact Wirtinger differentiation.
//
// A ScalarField is a handle to a node of a process-wide, hash-consed
// expression DAG. Nodes are immutable once interned; structurally equal
// subterms share one node, and derivatives are memoized per (node, symbol),
// which keeps repeated differentiation of composite fields polynomial in size.
//
// The DAG works over the four independent symbols z1, z2, conj(z1), conj(z2).
// conj() is pushed down to the leaves at construction, and re/im/abs2 are
// rewritten into conj-arithmetic, so a single set of differentiation rules
// covers everything.

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pshkit {

using complex = std::complex<double>;

struct ComplexPoint2 {
  complex z1{};
  complex z2{};

  friend bool operator==(const ComplexPoint2&, const ComplexPoint2&) = default;
};

/// One Wirtinger derivative symbol.
enum class Wirtinger : std::uint8_t { dz1 = 0, dz2 = 1, dzbar1 = 2, dzbar2 = 3 };

/// Ordered multiset of Wirtinger symbols. Mixed partials commute, so only the
/// count of each symbol is stored; application happens in a canonical order.
class WirtingerIndex {
 public:
  WirtingerIndex() = default;
  WirtingerIndex(std::initializer_list<Wirtinger> symbols);
  explicit WirtingerIndex(std::span<const Wirtinger> symbols);

  int order() const noexcept;
  int count(Wirtinger s) const noexcept { return counts_[static_cast<int>(s)]; }
  /// Symbols in canonical order (dz1, dz2, dzbar1, dzbar2), repeated by count.
  std::vector<Wirtinger> sequence() const;
  std::string to_string() const;

  /// Every index of total order 0..max_order.
  static std::vector<WirtingerIndex> all_up_to(int max_order);

  friend bool operator==(const WirtingerIndex&, const WirtingerIndex&) = default;

 private:
  std::array<int, 4> counts_{};
};

class ScalarField {
 public:
  /// The zero constant.
  ScalarField();

  static ScalarField constant(complex c);
  static ScalarField constant(double c) { return constant(complex(c, 0.0)); }
  static ScalarField z1();
  static ScalarField z2();

  std::uint32_t id() const noexcept { return id_; }
  bool real_valued() const noexcept { return real_; }
  /// Same node, flagged as real-valued. For fields known to be real by
  /// construction (Levi forms of real functions, |.|^2, ...).
  ScalarField assume_real() const { return ScalarField(id_, true); }

  std::optional<complex> constant_value() const;
  bool is_zero() const;

  ScalarField operator-() const;
  ScalarField& operator+=(const ScalarField& o) { return *this = *this + o; }
  ScalarField& operator-=(const ScalarField& o) { return *this = *this - o; }
  ScalarField& operator*=(const ScalarField& o) { return *this = *this * o; }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);

  friend bool operator==(const ScalarField& a, const ScalarField& b) { return a.id_ == b.id_; }

  // Internal: wrap an interned node id.
  ScalarField(std::uint32_t id, bool real) : id_(id), real_(real) {}

 private:
  std::uint32_t id_;
  bool real_;
};

inline ScalarField operator+(const ScalarField& a, double b) { return a + ScalarField::constant(b); }
inline ScalarField operator+(double a, const ScalarField& b) { return ScalarField::constant(a) + b; }
inline ScalarField operator-(const ScalarField& a, double b) { return a - ScalarField::constant(b); }
inline ScalarField operator-(double a, const ScalarField& b) { return ScalarField::constant(a) - b; }
inline ScalarField operator*(double a, const ScalarField& b) { return ScalarField::constant(a) * b; }
inline ScalarField operator*(const ScalarField& a, double b) { return a * ScalarField::constant(b); }
inline ScalarField operator/(const ScalarField& a, double b) { return a / ScalarField::constant(b); }

ScalarField pow(const ScalarField& base, int k);
/// Real power base^a on the principal branch. Evaluation requires a positive
/// real base and fails otherwise, so a field built with rpow carries the sign
/// of its base as a domain restriction.
ScalarField rpow(const ScalarField& base, double a);
ScalarField exp(const ScalarField& f);
ScalarField sqrt(const ScalarField& f);
ScalarField conj(const ScalarField& f);
ScalarField re(const ScalarField& f);
ScalarField im(const ScalarField& f);
ScalarField abs2(const ScalarField& f);

ScalarField wirtinger(const ScalarField& f, Wirtinger s);
ScalarField wirtinger(const ScalarField& f, const WirtingerIndex& idx);
/// Applies the symbols in exactly the given order (first element first).
ScalarField wirtinger_sequence(const ScalarField& f, std::span<const Wirtinger> seq);

/// Printable form in the expression grammar. Fields containing rpow print an
/// `rpow(e, a)` term, which the parser does not accept.
std::string to_string(const ScalarField& f);

/// Number of distinct DAG nodes reachable from f.
std::size_t node_count(const ScalarField& f);
/// Total number of interned nodes in the process-wide pool.
std::size_t pool_size();

/// Vector field X = X1 ∂/∂z1 + X2 ∂/∂z2 with symbolic components.
struct VectorField2 {
  ScalarField c1;
  ScalarField c2;

  /// X(f) = Σ X_j ∂f/∂z_j.
  ScalarField apply(const ScalarField& f) const;
};

}  // namespace pshkit
