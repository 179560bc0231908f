#include "netreduce/expression.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

namespace netreduce {

namespace {

constexpr std::size_t kStackNodes = 64;

// Scratch storage for per-node values; small trees stay on the stack.
class Scratch {
 public:
  explicit Scratch(std::size_t n) {
    if (n > kStackNodes) heap_.resize(n);
    data_ = n > kStackNodes ? heap_.data() : stack_.data();
  }
  double& operator[](std::size_t i) { return data_[i]; }

 private:
  std::array<double, kStackNodes> stack_{};
  std::vector<double> heap_;
  double* data_;
};

bool integral_constant(const Expr::Node& n, long& out) {
  if (n.kind != NodeKind::constant) return false;
  double r = std::nearbyint(n.value);
  if (r != n.value || std::abs(r) > 1e6) return false;
  out = static_cast<long>(r);
  return true;
}

double ipow(double b, long e) {
  if (e < 0) {
    if (b == 0.0) throw EvalError("division by zero in negative power");
    return 1.0 / ipow(b, -e);
  }
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), end);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return s;
}

}  // namespace

Expr::Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) { index_refs(); }

Expr Expr::constant(double value) {
  Node n;
  n.kind = NodeKind::constant;
  n.value = value;
  return Expr({n});
}

Expr Expr::parameter(std::size_t k) {
  Node n;
  n.kind = NodeKind::parameter;
  n.index = static_cast<std::uint32_t>(k);
  return Expr({n});
}

Expr Expr::species(std::size_t i) {
  Node n;
  n.kind = NodeKind::species;
  n.index = static_cast<std::uint32_t>(i);
  return Expr({n});
}

Expr Expr::binary(NodeKind kind, const Expr& a, const Expr& b) {
  std::vector<Node> nodes;
  nodes.reserve(a.nodes_.size() + b.nodes_.size() + 1);
  nodes = a.nodes_;
  const auto offset = static_cast<std::int32_t>(a.nodes_.size());
  for (Node n : b.nodes_) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    nodes.push_back(n);
  }
  Node root;
  root.kind = kind;
  root.lhs = offset - 1;
  root.rhs = static_cast<std::int32_t>(nodes.size()) - 1;
  nodes.push_back(root);
  return Expr(std::move(nodes));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::div, a, b); }
Expr Expr::pow(const Expr& base, const Expr& exponent) { return binary(NodeKind::pow, base, exponent); }

Expr operator-(const Expr& a) {
  std::vector<Expr::Node> nodes = a.nodes_;
  Expr::Node root;
  root.kind = NodeKind::neg;
  root.lhs = static_cast<std::int32_t>(nodes.size()) - 1;
  nodes.push_back(root);
  return Expr(std::move(nodes));
}

void Expr::index_refs() {
  params_.clear();
  species_.clear();
  for (const Node& n : nodes_) {
    if (n.kind == NodeKind::parameter) params_.push_back(n.index);
    if (n.kind == NodeKind::species) species_.push_back(n.index);
  }
  std::sort(params_.begin(), params_.end());
  params_.erase(std::unique(params_.begin(), params_.end()), params_.end());
  std::sort(species_.begin(), species_.end());
  species_.erase(std::unique(species_.begin(), species_.end()), species_.end());

  slot_.assign(nodes_.size(), 0);
  has_vars_.assign(nodes_.size(), false);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case NodeKind::parameter:
        slot_[i] = static_cast<std::uint32_t>(
            std::lower_bound(params_.begin(), params_.end(), n.index) - params_.begin());
        has_vars_[i] = true;
        break;
      case NodeKind::species:
        slot_[i] = static_cast<std::uint32_t>(
            std::lower_bound(species_.begin(), species_.end(), n.index) - species_.begin());
        has_vars_[i] = true;
        break;
      case NodeKind::constant:
        break;
      default:
        has_vars_[i] = (n.lhs >= 0 && has_vars_[n.lhs]) || (n.rhs >= 0 && has_vars_[n.rhs]);
    }
  }
}

namespace {

double eval_node(const Expr::Node& n, const std::vector<Expr::Node>& nodes, Scratch& v,
                 std::span<const double> x, std::span<const double> c) {
  switch (n.kind) {
    case NodeKind::constant:
      return n.value;
    case NodeKind::parameter:
      return c[n.index];
    case NodeKind::species:
      return x[n.index];
    case NodeKind::add:
      return v[n.lhs] + v[n.rhs];
    case NodeKind::sub:
      return v[n.lhs] - v[n.rhs];
    case NodeKind::mul:
      return v[n.lhs] * v[n.rhs];
    case NodeKind::div:
      if (v[n.rhs] == 0.0) throw EvalError("division by zero");
      return v[n.lhs] / v[n.rhs];
    case NodeKind::neg:
      return -v[n.lhs];
    case NodeKind::pow: {
      long e = 0;
      if (integral_constant(nodes[n.rhs], e)) return ipow(v[n.lhs], e);
      double r = std::pow(v[n.lhs], v[n.rhs]);
      if (!std::isfinite(r) && std::isfinite(v[n.lhs]) && std::isfinite(v[n.rhs]))
        throw EvalError("invalid power");
      return r;
    }
  }
  return 0.0;
}

}  // namespace

double Expr::evaluate(std::span<const double> x, std::span<const double> c) const {
  Scratch v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) v[i] = eval_node(nodes_[i], nodes_, v, x, c);
  return v[nodes_.size() - 1];
}

double Expr::gradient(std::span<const double> x, std::span<const double> c, std::span<double> d_dc,
                      std::span<double> d_dx) const {
  const std::size_t n = nodes_.size();
  Scratch v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = eval_node(nodes_[i], nodes_, v, x, c);

  std::fill(d_dc.begin(), d_dc.end(), 0.0);
  std::fill(d_dx.begin(), d_dx.end(), 0.0);
  Scratch adj(n);
  for (std::size_t i = 0; i < n; ++i) adj[i] = 0.0;
  adj[n - 1] = 1.0;

  for (std::size_t ii = n; ii-- > 0;) {
    const Node& node = nodes_[ii];
    const double a = adj[ii];
    if (a == 0.0 || !has_vars_[ii]) continue;
    switch (node.kind) {
      case NodeKind::constant:
        break;
      case NodeKind::parameter:
        if (!d_dc.empty()) d_dc[slot_[ii]] += a;
        break;
      case NodeKind::species:
        if (!d_dx.empty()) d_dx[slot_[ii]] += a;
        break;
      case NodeKind::add:
        adj[node.lhs] += a;
        adj[node.rhs] += a;
        break;
      case NodeKind::sub:
        adj[node.lhs] += a;
        adj[node.rhs] -= a;
        break;
      case NodeKind::mul:
        adj[node.lhs] += a * v[node.rhs];
        adj[node.rhs] += a * v[node.lhs];
        break;
      case NodeKind::div: {
        const double d = v[node.rhs];
        adj[node.lhs] += a / d;
        adj[node.rhs] -= a * v[node.lhs] / (d * d);
        break;
      }
      case NodeKind::neg:
        adj[node.lhs] -= a;
        break;
      case NodeKind::pow: {
        const double b = v[node.lhs];
        long e = 0;
        if (integral_constant(nodes_[node.rhs], e)) {
          if (e != 0) adj[node.lhs] += a * static_cast<double>(e) * ipow(b, e - 1);
          break;
        }
        const double e_val = v[node.rhs];
        if (has_vars_[node.lhs]) {
          if (b == 0.0 && e_val < 1.0) throw EvalError("power not differentiable at zero base");
          adj[node.lhs] += a * e_val * std::pow(b, e_val - 1.0);
        }
        if (has_vars_[node.rhs]) {
          if (b <= 0.0) throw EvalError("power not differentiable in exponent for non-positive base");
          adj[node.rhs] += a * v[ii] * std::log(b);
        }
        break;
      }
    }
  }
  return v[n - 1];
}

Expr Expr::substitute(const LeafRewrite& params, const LeafRewrite& species) const {
  std::vector<Node> out = nodes_;
  for (Node& n : out) {
    const LeafRewrite* f = nullptr;
    if (n.kind == NodeKind::parameter) f = &params;
    if (n.kind == NodeKind::species) f = &species;
    if (f == nullptr || !*f) continue;
    LeafMap m = (*f)(n.index);
    if (m.constant) {
      n.kind = NodeKind::constant;
      n.value = *m.constant;
      n.index = 0;
    } else if (m.index) {
      n.index = static_cast<std::uint32_t>(*m.index);
    }
  }
  return Expr(std::move(out));
}

Expr Expr::map_species(const std::function<Expr(std::size_t)>& f) const {
  // Rebuild bottom-up; each node's replacement subtree is kept in a table.
  std::vector<std::unique_ptr<Expr>> built(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    Expr e;
    switch (n.kind) {
      case NodeKind::constant:
        e = constant(n.value);
        break;
      case NodeKind::parameter:
        e = parameter(n.index);
        break;
      case NodeKind::species:
        e = f(n.index);
        break;
      case NodeKind::neg:
        e = -*built[n.lhs];
        break;
      default:
        e = binary(n.kind, *built[n.lhs], *built[n.rhs]);
    }
    built[i] = std::make_unique<Expr>(std::move(e));
  }
  return *built.back();
}

bool Expr::operator==(const Expr& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& a = nodes_[i];
    const Node& b = other.nodes_[i];
    if (a.kind != b.kind || a.lhs != b.lhs || a.rhs != b.rhs) return false;
    if (a.kind == NodeKind::constant && a.value != b.value) return false;
    if ((a.kind == NodeKind::parameter || a.kind == NodeKind::species) && a.index != b.index) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::add:
    case NodeKind::sub:
      return 1;
    case NodeKind::mul:
    case NodeKind::div:
      return 2;
    case NodeKind::neg:
      return 3;
    case NodeKind::pow:
      return 4;
    default:
      return 5;
  }
}

struct Printer {
  const std::vector<Expr::Node>& nodes;
  std::span<const std::string> pnames;
  std::span<const std::string> snames;

  std::string leaf(const Expr::Node& n) const {
    switch (n.kind) {
      case NodeKind::constant: {
        std::string s = format_double(n.value);
        return n.value < 0 || std::signbit(n.value) ? "(" + s + ")" : s;
      }
      case NodeKind::parameter:
        return n.index < pnames.size() ? pnames[n.index] : "p" + std::to_string(n.index);
      case NodeKind::species:
        return n.index < snames.size() ? snames[n.index] : "x" + std::to_string(n.index);
      default:
        return {};
    }
  }

  std::string wrap(std::int32_t child, bool paren) const {
    std::string s = print(child);
    return paren ? "(" + s + ")" : s;
  }

  std::string print(std::int32_t idx) const {
    const Expr::Node& n = nodes[idx];
    const int p = precedence(n.kind);
    switch (n.kind) {
      case NodeKind::neg: {
        const int cp = precedence(nodes[n.lhs].kind);
        return "-" + wrap(n.lhs, cp <= p);
      }
      case NodeKind::add:
      case NodeKind::sub:
      case NodeKind::mul:
      case NodeKind::div: {
        const int lp = precedence(nodes[n.lhs].kind);
        const int rp = precedence(nodes[n.rhs].kind);
        const char* op = n.kind == NodeKind::add   ? " + "
                         : n.kind == NodeKind::sub ? " - "
                         : n.kind == NodeKind::mul ? "*"
                                                   : "/";
        // Left-associative: right operand of equal precedence needs parentheses.
        return wrap(n.lhs, lp < p) + op + wrap(n.rhs, rp <= p);
      }
      case NodeKind::pow: {
        const int lp = precedence(nodes[n.lhs].kind);
        const int rp = precedence(nodes[n.rhs].kind);
        return wrap(n.lhs, lp <= p) + "^" + wrap(n.rhs, rp < p);
      }
      default:
        return leaf(n);
    }
  }
};

}  // namespace

std::string Expr::to_string(std::span<const std::string> param_names,
                            std::span<const std::string> species_names) const {
  Printer p{nodes_, param_names, species_names};
  return p.print(static_cast<std::int32_t>(nodes_.size()) - 1);
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | '(' expr ')'

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Expr::NameResolver& resolve) : s_(text), resolve_(resolve) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << what << " at position " << pos_ << " in '" << s_ << "'";
    throw ExprSyntaxError(os.str());
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char ch) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + term();
      else if (accept('-'))
        lhs = lhs - term();
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = lhs * unary();
      else if (accept('/'))
        lhs = lhs / unary();
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) {
      skip_ws();
      // -<literal> folds into a negative constant unless a power follows
      if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
        const std::size_t save = pos_;
        double v = number();
        skip_ws();
        if (pos_ >= s_.size() || s_[pos_] != '^') return Expr::constant(-v);
        pos_ = save;
      }
      return -unary();
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::pow(base, unary());
    return base;
  }

  double number() {
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{}) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char ch = s_[pos_];
    if (ch == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return Expr::constant(number());
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      return resolve_(s_.substr(start, pos_ - start));
    }
    fail(std::string("unexpected character '") + ch + "'");
  }

  std::string_view s_;
  const Expr::NameResolver& resolve_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text, const NameResolver& resolve) { return Parser(text, resolve).parse(); }

}  // namespace netreduce
