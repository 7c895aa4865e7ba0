#include "pshkit/expr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pshkit/detail/node.hpp"

namespace pshkit {
namespace detail {
namespace {

struct NodeKey {
  Node n;
  bool operator==(const NodeKey& o) const {
    return n.op == o.n.op && n.var == o.n.var && n.k == o.n.k &&
           std::bit_cast<std::uint64_t>(n.x) == std::bit_cast<std::uint64_t>(o.n.x) &&
           std::bit_cast<std::uint64_t>(n.c.real()) == std::bit_cast<std::uint64_t>(o.n.c.real()) &&
           std::bit_cast<std::uint64_t>(n.c.imag()) == std::bit_cast<std::uint64_t>(o.n.c.imag()) &&
           n.a == o.n.a && n.b == o.n.b;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& key) const noexcept {
    const Node& n = key.n;
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(n.op));
    mix(n.var);
    mix(static_cast<std::uint32_t>(n.k));
    mix(std::bit_cast<std::uint64_t>(n.x));
    mix(std::bit_cast<std::uint64_t>(n.c.real()));
    mix(std::bit_cast<std::uint64_t>(n.c.imag()));
    mix(n.a);
    mix(n.b);
    return static_cast<std::size_t>(h);
  }
};

// Process-wide unique table. Nodes are never freed; handles are plain ids.
class Pool {
 public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  std::recursive_mutex& mutex() { return mutex_; }

  std::uint32_t intern(Node n) {
    std::lock_guard lock(mutex_);
    if (n.op == Op::constant) {
      // Normalize signed zeros so equal constants share a node.
      n.c = complex(n.c.real() + 0.0, n.c.imag() + 0.0);
    }
    NodeKey key{n};
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(n);
    table_.emplace(key, id);
    return id;
  }

  Node get(std::uint32_t id) const {
    std::lock_guard lock(mutex_);
    return nodes_[id];
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return nodes_.size();
  }

  // Caller holds the mutex for the following.
  const Node& at(std::uint32_t id) const { return nodes_[id]; }
  std::unordered_map<std::uint64_t, std::uint32_t>& derivative_memo() { return derivative_memo_; }
  std::unordered_map<std::uint32_t, std::uint32_t>& conj_memo() { return conj_memo_; }

 private:
  using complex = std::complex<double>;
  mutable std::recursive_mutex mutex_;
  std::vector<Node> nodes_;
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> table_;
  std::unordered_map<std::uint64_t, std::uint32_t> derivative_memo_;
  std::unordered_map<std::uint32_t, std::uint32_t> conj_memo_;
};

using complex = std::complex<double>;

std::uint32_t make_const(complex c) {
  Node n;
  n.op = Op::constant;
  n.c = c;
  return Pool::instance().intern(n);
}

std::optional<complex> const_of(std::uint32_t id) {
  Node n = Pool::instance().get(id);
  if (n.op == Op::constant) return n.c;
  return std::nullopt;
}

bool is_const(std::uint32_t id, complex v) {
  auto c = const_of(id);
  return c && *c == v;
}

std::uint32_t make_var(int v) {
  Node n;
  n.op = Op::variable;
  n.var = static_cast<std::uint8_t>(v);
  return Pool::instance().intern(n);
}

std::uint32_t make_add(std::uint32_t a, std::uint32_t b) {
  auto ca = const_of(a);
  auto cb = const_of(b);
  if (ca && cb) return make_const(*ca + *cb);
  if (ca && *ca == complex(0.0)) return b;
  if (cb && *cb == complex(0.0)) return a;
  if (a > b) std::swap(a, b);
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  return Pool::instance().intern(n);
}

std::uint32_t make_mul(std::uint32_t a, std::uint32_t b) {
  auto ca = const_of(a);
  auto cb = const_of(b);
  if (ca && cb) return make_const(*ca * *cb);
  if ((ca && *ca == complex(0.0)) || (cb && *cb == complex(0.0))) return make_const(0.0);
  if (ca && *ca == complex(1.0)) return b;
  if (cb && *cb == complex(1.0)) return a;
  if (a > b) std::swap(a, b);
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  return Pool::instance().intern(n);
}

std::uint32_t make_div(std::uint32_t a, std::uint32_t b) {
  auto cb = const_of(b);
  if (cb) {
    if (*cb == complex(0.0)) throw std::domain_error("division by the zero constant");
    return make_mul(make_const(1.0 / *cb), a);
  }
  if (is_const(a, 0.0)) return a;
  Node n;
  n.op = Op::div;
  n.a = a;
  n.b = b;
  return Pool::instance().intern(n);
}

complex int_power(complex base, int k) {
  complex result(1.0);
  bool invert = k < 0;
  unsigned e = static_cast<unsigned>(invert ? -static_cast<long>(k) : k);
  while (e) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1;
  }
  return invert ? 1.0 / result : result;
}

std::uint32_t make_ipow(std::uint32_t a, int k) {
  if (k == 0) return make_const(1.0);
  if (k == 1) return a;
  if (auto ca = const_of(a)) {
    if (k < 0 && *ca == complex(0.0)) throw std::domain_error("negative power of the zero constant");
    return make_const(int_power(*ca, k));
  }
  Node n;
  n.op = Op::ipow;
  n.a = a;
  n.k = k;
  return Pool::instance().intern(n);
}

std::uint32_t make_rpow(std::uint32_t a, double x) {
  if (x == 0.0) return make_const(1.0);
  if (x == 1.0) return a;
  if (auto ca = const_of(a); ca && ca->imag() == 0.0 && ca->real() > 0.0) {
    return make_const(std::pow(ca->real(), x));
  }
  Node n;
  n.op = Op::rpow;
  n.a = a;
  n.x = x;
  return Pool::instance().intern(n);
}

std::uint32_t make_exp(std::uint32_t a) {
  if (auto ca = const_of(a)) return make_const(std::exp(*ca));
  Node n;
  n.op = Op::exp;
  n.a = a;
  return Pool::instance().intern(n);
}

std::uint32_t make_sqrt(std::uint32_t a) {
  if (auto ca = const_of(a)) return make_const(std::sqrt(*ca));
  Node n;
  n.op = Op::sqrt;
  n.a = a;
  return Pool::instance().intern(n);
}

// Nodes reachable from root, ascending by id.
std::vector<std::uint32_t> reachable(const std::vector<std::uint32_t>& roots) {
  Pool& pool = Pool::instance();
  std::vector<std::uint32_t> stack(roots.begin(), roots.end());
  std::vector<std::uint32_t> out;
  std::unordered_map<std::uint32_t, bool> seen;
  while (!stack.empty()) {
    std::uint32_t id = stack.back();
    stack.pop_back();
    if (!seen.emplace(id, true).second) continue;
    out.push_back(id);
    const Node& n = pool.at(id);
    switch (n.op) {
      case Op::constant:
      case Op::variable:
        break;
      case Op::add:
      case Op::mul:
      case Op::div:
        stack.push_back(n.a);
        stack.push_back(n.b);
        break;
      case Op::ipow:
      case Op::rpow:
      case Op::exp:
      case Op::sqrt:
        stack.push_back(n.a);
        break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t conj_node(std::uint32_t root) {
  Pool& pool = Pool::instance();
  std::lock_guard lock(pool.mutex());
  auto& memo = pool.conj_memo();
  if (auto it = memo.find(root); it != memo.end()) return it->second;
  for (std::uint32_t id : reachable({root})) {
    if (memo.count(id)) continue;
    Node n = pool.at(id);
    std::uint32_t r = 0;
    switch (n.op) {
      case Op::constant: r = make_const(std::conj(n.c)); break;
      case Op::variable: r = make_var((n.var + 2) % 4); break;
      case Op::add: r = make_add(memo.at(n.a), memo.at(n.b)); break;
      case Op::mul: r = make_mul(memo.at(n.a), memo.at(n.b)); break;
      case Op::div: r = make_div(memo.at(n.a), memo.at(n.b)); break;
      case Op::ipow: r = make_ipow(memo.at(n.a), n.k); break;
      case Op::rpow: r = make_rpow(memo.at(n.a), n.x); break;
      case Op::exp: r = make_exp(memo.at(n.a)); break;
      case Op::sqrt: r = make_sqrt(memo.at(n.a)); break;
    }
    memo.emplace(id, r);
    memo.emplace(r, id);
  }
  return memo.at(root);
}

std::uint32_t derivative_node(std::uint32_t root, int var) {
  Pool& pool = Pool::instance();
  std::lock_guard lock(pool.mutex());
  auto& memo = pool.derivative_memo();
  auto key = [var](std::uint32_t id) { return (static_cast<std::uint64_t>(id) << 2) | static_cast<std::uint64_t>(var); };
  if (auto it = memo.find(key(root)); it != memo.end()) return it->second;
  const std::uint32_t zero = make_const(0.0);
  auto d = [&](std::uint32_t id) { return memo.at(key(id)); };
  for (std::uint32_t id : reachable({root})) {
    if (memo.count(key(id))) continue;
    Node n = pool.at(id);
    std::uint32_t r = zero;
    switch (n.op) {
      case Op::constant:
        break;
      case Op::variable:
        r = make_const(n.var == var ? 1.0 : 0.0);
        break;
      case Op::add:
        r = make_add(d(n.a), d(n.b));
        break;
      case Op::mul:
        r = make_add(make_mul(d(n.a), n.b), make_mul(n.a, d(n.b)));
        break;
      case Op::div: {
        // d(a/b) = (da - (a/b) db) / b
        std::uint32_t da = d(n.a), db = d(n.b);
        if (db == zero) {
          r = make_div(da, n.b);
        } else {
          r = make_div(make_add(da, make_mul(make_const(-1.0), make_mul(id, db))), n.b);
        }
        break;
      }
      case Op::ipow: {
        std::uint32_t da = d(n.a);
        if (da != zero) {
          r = make_mul(make_mul(make_const(static_cast<double>(n.k)), make_ipow(n.a, n.k - 1)), da);
        }
        break;
      }
      case Op::rpow: {
        std::uint32_t da = d(n.a);
        if (da != zero) r = make_mul(make_mul(make_const(n.x), make_rpow(n.a, n.x - 1.0)), da);
        break;
      }
      case Op::exp: {
        std::uint32_t da = d(n.a);
        if (da != zero) r = make_mul(id, da);
        break;
      }
      case Op::sqrt: {
        std::uint32_t da = d(n.a);
        if (da != zero) r = make_div(make_mul(make_const(0.5), da), id);
        break;
      }
    }
    memo.emplace(key(id), r);
  }
  return memo.at(key(root));
}

int precedence(Op op) {
  switch (op) {
    case Op::add: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::ipow: return 3;
    default: return 4;
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_constant(complex c) {
  if (c.imag() == 0.0) {
    if (c.real() < 0.0) return "(" + format_number(c.real()) + ")";
    return format_number(c.real());
  }
  if (c.real() == 0.0) return "(" + format_number(c.imag()) + "*i)";
  return "(" + format_number(c.real()) + "+" + format_number(c.imag()) + "*i)";
}

std::string print(std::uint32_t id, int parent_prec) {
  Node n = Pool::instance().get(id);
  std::string s;
  int prec = precedence(n.op);
  switch (n.op) {
    case Op::constant: return format_constant(n.c);
    case Op::variable: {
      static const char* names[] = {"z1", "z2", "conj(z1)", "conj(z2)"};
      return names[n.var];
    }
    case Op::add: s = print(n.a, 1) + " + " + print(n.b, 1); break;
    case Op::mul: s = print(n.a, 2) + "*" + print(n.b, 3); break;
    case Op::div: s = print(n.a, 2) + "/" + print(n.b, 3); break;
    case Op::ipow: s = print(n.a, 4) + "^" + (n.k < 0 ? "(" + std::to_string(n.k) + ")" : std::to_string(n.k)); break;
    case Op::rpow: return "rpow(" + print(n.a, 0) + ", " + format_number(n.x) + ")";
    case Op::exp: return "exp(" + print(n.a, 0) + ")";
    case Op::sqrt: return "sqrt(" + print(n.a, 0) + ")";
  }
  return prec < parent_prec ? "(" + s + ")" : s;
}

}  // namespace

std::vector<Node> linearize(const std::vector<std::uint32_t>& roots, std::vector<std::uint32_t>& root_slots) {
  Pool& pool = Pool::instance();
  std::lock_guard lock(pool.mutex());
  std::vector<std::uint32_t> ids = reachable(roots);
  std::unordered_map<std::uint32_t, std::uint32_t> slot;
  slot.reserve(ids.size());
  std::vector<Node> out;
  out.reserve(ids.size());
  for (std::uint32_t id : ids) {
    Node n = pool.at(id);
    switch (n.op) {
      case Op::add:
      case Op::mul:
      case Op::div:
        n.a = slot.at(n.a);
        n.b = slot.at(n.b);
        break;
      case Op::ipow:
      case Op::rpow:
      case Op::exp:
      case Op::sqrt:
        n.a = slot.at(n.a);
        break;
      default:
        break;
    }
    slot.emplace(id, static_cast<std::uint32_t>(out.size()));
    out.push_back(n);
  }
  root_slots.clear();
  for (std::uint32_t r : roots) root_slots.push_back(slot.at(r));
  return out;
}

}  // namespace detail

using detail::Op;

// ---------------------------------------------------------------------------
// WirtingerIndex

WirtingerIndex::WirtingerIndex(std::initializer_list<Wirtinger> symbols)
    : WirtingerIndex(std::span<const Wirtinger>(symbols.begin(), symbols.size())) {}

WirtingerIndex::WirtingerIndex(std::span<const Wirtinger> symbols) {
  for (Wirtinger s : symbols) ++counts_[static_cast<int>(s)];
}

int WirtingerIndex::order() const noexcept {
  return counts_[0] + counts_[1] + counts_[2] + counts_[3];
}

std::vector<Wirtinger> WirtingerIndex::sequence() const {
  std::vector<Wirtinger> seq;
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < counts_[s]; ++i) seq.push_back(static_cast<Wirtinger>(s));
  }
  return seq;
}

std::string WirtingerIndex::to_string() const {
  static const char* names[] = {"dz1", "dz2", "dzbar1", "dzbar2"};
  std::string out = "{";
  bool first = true;
  for (Wirtinger s : sequence()) {
    if (!first) out += ",";
    out += names[static_cast<int>(s)];
    first = false;
  }
  return out + "}";
}

std::vector<WirtingerIndex> WirtingerIndex::all_up_to(int max_order) {
  std::vector<WirtingerIndex> out;
  for (int a = 0; a <= max_order; ++a)
    for (int b = 0; a + b <= max_order; ++b)
      for (int c = 0; a + b + c <= max_order; ++c)
        for (int d = 0; a + b + c + d <= max_order; ++d) {
          WirtingerIndex idx;
          idx.counts_ = {a, b, c, d};
          out.push_back(idx);
        }
  return out;
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField() : id_(detail::make_const(0.0)), real_(true) {}

ScalarField ScalarField::constant(complex c) { return {detail::make_const(c), c.imag() == 0.0}; }
ScalarField ScalarField::z1() { return {detail::make_var(0), false}; }
ScalarField ScalarField::z2() { return {detail::make_var(1), false}; }

std::optional<complex> ScalarField::constant_value() const { return detail::const_of(id_); }

bool ScalarField::is_zero() const { return detail::is_const(id_, 0.0); }

ScalarField ScalarField::operator-() const {
  return {detail::make_mul(detail::make_const(-1.0), id_), real_};
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return {detail::make_add(a.id_, b.id_), a.real_ && b.real_};
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + (-b); }

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return {detail::make_mul(a.id_, b.id_), a.real_ && b.real_};
}

ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return {detail::make_div(a.id(), b.id()), a.real_valued() && b.real_valued()};
}

ScalarField pow(const ScalarField& base, int k) {
  return {detail::make_ipow(base.id(), k), base.real_valued()};
}

ScalarField rpow(const ScalarField& base, double a) {
  return {detail::make_rpow(base.id(), a), base.real_valued()};
}

ScalarField exp(const ScalarField& f) { return {detail::make_exp(f.id()), f.real_valued()}; }

ScalarField sqrt(const ScalarField& f) { return {detail::make_sqrt(f.id()), false}; }

ScalarField conj(const ScalarField& f) { return {detail::conj_node(f.id()), f.real_valued()}; }

ScalarField re(const ScalarField& f) { return (0.5 * (f + conj(f))).assume_real(); }

ScalarField im(const ScalarField& f) {
  return (ScalarField::constant(complex(0.0, -0.5)) * (f - conj(f))).assume_real();
}

ScalarField abs2(const ScalarField& f) { return (f * conj(f)).assume_real(); }

ScalarField wirtinger(const ScalarField& f, Wirtinger s) {
  return {detail::derivative_node(f.id(), static_cast<int>(s)), false};
}

ScalarField wirtinger(const ScalarField& f, const WirtingerIndex& idx) {
  auto seq = idx.sequence();
  return wirtinger_sequence(f, seq);
}

ScalarField wirtinger_sequence(const ScalarField& f, std::span<const Wirtinger> seq) {
  if (seq.empty()) return f;
  ScalarField out = f;
  for (Wirtinger s : seq) out = wirtinger(out, s);
  return out;
}

std::string to_string(const ScalarField& f) { return detail::print(f.id(), 0); }

std::size_t node_count(const ScalarField& f) {
  std::vector<std::uint32_t> slots;
  return detail::linearize({f.id()}, slots).size();
}

std::size_t pool_size() { return detail::Pool::instance().size(); }

ScalarField VectorField2::apply(const ScalarField& f) const {
  return c1 * wirtinger(f, Wirtinger::dz1) + c2 * wirtinger(f, Wirtinger::dz2);
}

}  // namespace pshkit
