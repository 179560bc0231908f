#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netreduce {

/// Raised when an expression cannot be evaluated (division by zero, invalid power).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the infix parser.
class ExprSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind : std::uint8_t { constant, parameter, species, add, sub, mul, div, neg, pow };

/**
 * Immutable arithmetic expression over parameter and species references.
 *
 * Nodes are kept in postfix order in a flat array, so a child always precedes
 * its parent and the root is the last node. Evaluation is a forward sweep and
 * differentiation a reverse sweep over the same array, which gives exact
 * derivatives of the expression with respect to every referenced parameter and
 * species.
 */
class Expr {
 public:
  struct Node {
    NodeKind kind = NodeKind::constant;
    double value = 0.0;       // constant nodes
    std::uint32_t index = 0;  // parameter/species index
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr parameter(std::size_t k);
  static Expr species(std::size_t i);
  static Expr pow(const Expr& base, const Expr& exponent);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  double evaluate(std::span<const double> x, std::span<const double> c) const;

  /// Value plus partial derivatives. d_dc is aligned with parameter_refs(), d_dx
  /// with species_refs(); pass an empty span to skip either.
  double gradient(std::span<const double> x, std::span<const double> c, std::span<double> d_dc,
                  std::span<double> d_dx) const;

  /// Sorted, unique parameter indices referenced by the tree.
  const std::vector<std::size_t>& parameter_refs() const { return params_; }
  /// Sorted, unique species indices referenced by the tree.
  const std::vector<std::size_t>& species_refs() const { return species_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  NodeKind root_kind() const { return nodes_.back().kind; }

  /// Replacement for a leaf: either a new index or a constant.
  struct LeafMap {
    std::optional<std::size_t> index;
    std::optional<double> constant;
  };
  using LeafRewrite = std::function<LeafMap(std::size_t)>;

  /// Rewrites parameter and species leaves. Leaves mapped to constants become
  /// constant nodes; the tree shape is otherwise preserved.
  Expr substitute(const LeafRewrite& params, const LeafRewrite& species) const;

  /// Replaces each species leaf by the given expression (in terms of the leaf index).
  Expr map_species(const std::function<Expr(std::size_t)>& f) const;

  /// Infix rendering that parse() reads back to the same tree.
  std::string to_string(std::span<const std::string> param_names,
                        std::span<const std::string> species_names) const;

  /// Resolves a name to a parameter or species leaf; must throw for unknown names.
  using NameResolver = std::function<Expr(std::string_view)>;
  static Expr parse(std::string_view text, const NameResolver& resolve);

  bool operator==(const Expr& other) const;

 private:
  explicit Expr(std::vector<Node> nodes);
  static Expr binary(NodeKind kind, const Expr& a, const Expr& b);
  void index_refs();

  std::vector<Node> nodes_;
  std::vector<std::size_t> params_;
  std::vector<std::size_t> species_;
  std::vector<std::uint32_t> slot_;  // per node: position in params_/species_
  std::vector<bool> has_vars_;       // per node: subtree references a leaf variable
};

}  // namespace netreduce
