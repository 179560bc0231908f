#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netreduce/expression.hpp"

namespace netreduce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Invalid model content: schema violations, unknown names, bad stoichiometry.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoichEntry {
  std::size_t species;
  int count;
  bool operator==(const StoichEntry&) const = default;
};

/// Sparse column, ascending species order, no zero entries.
using StoichColumn = std::vector<StoichEntry>;

struct Reaction {
  std::string name;
  StoichColumn reactants;
  StoichColumn products;
  StoichColumn change;  // products - reactants
  Expr rate;
  /// Set when the rate was declared as the mass-action shorthand.
  std::optional<std::size_t> mass_action_param;
};

/// Counters for the propensity clamp; a negative expression value evaluates to 0.
struct EvalCounters {
  std::size_t clamped = 0;
};

/// Parameter-gradient restricted to the parameters a reaction references.
struct SparseGradient {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

/**
 * A parameterized reaction network: d species, K parameters, J reactions with
 * stoichiometry (reactants, products, net change) and propensity expressions.
 * Immutable once constructed.
 */
class Network {
 public:
  Network() = default;
  Network(std::vector<std::string> species, Vector initial_state, std::vector<std::string> parameters,
          Vector parameter_values, std::vector<Reaction> reactions, std::string units = "concentration");

  std::size_t num_species() const { return species_.size(); }
  std::size_t num_parameters() const { return parameters_.size(); }
  std::size_t num_reactions() const { return reactions_.size(); }

  const std::vector<std::string>& species_names() const { return species_; }
  const std::vector<std::string>& parameter_names() const { return parameters_; }
  const Vector& initial_state() const { return x0_; }
  const Vector& parameter_values() const { return c_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(std::size_t j) const { return reactions_.at(j); }
  const std::string& units() const { return units_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::optional<std::size_t> species_index(std::string_view name) const;
  std::optional<std::size_t> parameter_index(std::string_view name) const;

  /// a_j(x; c), clamped at zero.
  double propensity(std::size_t j, ConstVectorRef x, ConstVectorRef c, EvalCounters* counters = nullptr) const;
  void propensities(ConstVectorRef x, ConstVectorRef c, Eigen::Ref<Vector> out,
                    EvalCounters* counters = nullptr) const;

  /// a_j and its exact parameter-gradient over the reaction's parameter refs.
  /// A clamped propensity reports a zero gradient.
  double propensity_gradient(std::size_t j, ConstVectorRef x, ConstVectorRef c, SparseGradient& grad) const;

  /// d log a_j / d c_k over the reaction's parameter refs. Throws if a_j == 0.
  SparseGradient grad_log_propensity(std::size_t j, ConstVectorRef x, ConstVectorRef c) const;

  /// a_j and its gradient with respect to the species it references.
  double propensity_state_gradient(std::size_t j, ConstVectorRef x, ConstVectorRef c,
                                   std::vector<double>& d_dx) const;

  /// b(x) = nu a(x; c).
  Vector drift(ConstVectorRef x, ConstVectorRef c) const;
  /// Sigma(x) = nu diag(a(x; c)) nu^T.
  Matrix diffusion_matrix(ConstVectorRef x, ConstVectorRef c) const;

  /// phi(k): reactions whose rate references parameter k (ascending).
  const std::vector<std::vector<std::size_t>>& phi() const { return phi_; }

  /// Dense d x J net stoichiometry.
  Eigen::MatrixXi stoichiometry() const;

  /// Copy with different nominal parameter values.
  Network with_parameters(const Vector& c) const;

 private:
  void validate();

  std::vector<std::string> species_;
  Vector x0_;
  std::vector<std::string> parameters_;
  Vector c_;
  std::vector<Reaction> reactions_;
  std::string units_;
  std::vector<std::vector<std::size_t>> phi_;
  std::vector<std::string> warnings_;
};

/// Build a reaction from sparse reactant/product columns; computes the net change.
Reaction make_reaction(std::string name, StoichColumn reactants, StoichColumn products, Expr rate,
                       std::optional<std::size_t> mass_action_param = std::nullopt);

/// c_k * prod_i x_i^{reactant multiplicity}.
Expr mass_action_expr(std::size_t k, const StoichColumn& reactants);

/// Parse a model JSON document. Accepts reduced/fitted files too (their "network" member).
Network parse_model(std::string_view text);
Network load_model(const std::string& path);
/// Serialize to the model JSON schema; parse_model(serialize_model(n)) reproduces n.
std::string serialize_model(const Network& net);

}  // namespace netreduce
