#include "netreduce/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace netreduce {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; });
}

void normalize(StoichColumn& col) {
  std::sort(col.begin(), col.end(), [](const StoichEntry& a, const StoichEntry& b) { return a.species < b.species; });
  StoichColumn merged;
  for (const StoichEntry& e : col) {
    if (!merged.empty() && merged.back().species == e.species)
      merged.back().count += e.count;
    else
      merged.push_back(e);
  }
  std::erase_if(merged, [](const StoichEntry& e) { return e.count == 0; });
  col = std::move(merged);
}

}  // namespace

Reaction make_reaction(std::string name, StoichColumn reactants, StoichColumn products, Expr rate,
                       std::optional<std::size_t> mass_action_param) {
  for (const auto* col : {&reactants, &products})
    for (const StoichEntry& e : *col)
      if (e.count < 0) throw ModelError("negative stoichiometry in reaction '" + name + "'");
  normalize(reactants);
  normalize(products);
  std::map<std::size_t, int> net;
  for (const StoichEntry& e : products) net[e.species] += e.count;
  for (const StoichEntry& e : reactants) net[e.species] -= e.count;
  StoichColumn change;
  for (auto [i, n] : net)
    if (n != 0) change.push_back({i, n});
  return Reaction{std::move(name), std::move(reactants), std::move(products), std::move(change), std::move(rate),
                  mass_action_param};
}

Expr mass_action_expr(std::size_t k, const StoichColumn& reactants) {
  Expr e = Expr::parameter(k);
  for (const StoichEntry& r : reactants) {
    if (r.count == 1)
      e = e * Expr::species(r.species);
    else
      e = e * Expr::pow(Expr::species(r.species), Expr::constant(r.count));
  }
  return e;
}

Network::Network(std::vector<std::string> species, Vector initial_state, std::vector<std::string> parameters,
                 Vector parameter_values, std::vector<Reaction> reactions, std::string units)
    : species_(std::move(species)),
      x0_(std::move(initial_state)),
      parameters_(std::move(parameters)),
      c_(std::move(parameter_values)),
      reactions_(std::move(reactions)),
      units_(std::move(units)) {
  validate();
}

void Network::validate() {
  const std::size_t d = species_.size();
  const std::size_t K = parameters_.size();
  if (static_cast<std::size_t>(x0_.size()) != d) throw ModelError("dimension mismatch: initial state length");
  if (static_cast<std::size_t>(c_.size()) != K) throw ModelError("dimension mismatch: parameter vector length");

  std::set<std::string> seen;
  for (const auto* names : {&species_, &parameters_})
    for (const std::string& n : *names) {
      if (!valid_identifier(n)) throw ModelError("invalid name '" + n + "'");
      if (!seen.insert(n).second) throw ModelError("duplicate name '" + n + "'");
    }

  phi_.assign(K, {});
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    const Reaction& r = reactions_[j];
    for (const auto* col : {&r.reactants, &r.products, &r.change})
      for (const StoichEntry& e : *col) {
        if (e.species >= d) throw ModelError("dimension mismatch: species index out of range in reaction " + std::to_string(j));
      }
    for (const auto* col : {&r.reactants, &r.products})
      for (const StoichEntry& e : *col)
        if (e.count < 0) throw ModelError("negative stoichiometry in reaction " + std::to_string(j));
    for (std::size_t k : r.rate.parameter_refs()) {
      if (k >= K) throw ModelError("parameter index out of range in reaction " + std::to_string(j));
      phi_[k].push_back(j);
    }
    for (std::size_t i : r.rate.species_refs())
      if (i >= d) throw ModelError("species index out of range in reaction " + std::to_string(j));

    const std::size_t support = r.reactants.size() + r.products.size();
    if (d >= 6 && support > d / 2)
      warnings_.push_back("reaction " + std::to_string(j) + " has a dense stoichiometric column (" +
                          std::to_string(support) + " of " + std::to_string(d) + " species)");

    double a0 = 0.0;
    try {
      a0 = r.rate.evaluate({x0_.data(), d}, {c_.data(), K});
    } catch (const EvalError& e) {
      throw ModelError("reaction " + std::to_string(j) + ": " + e.what() + " at the initial state");
    }
    if (!std::isfinite(a0)) throw ModelError("reaction " + std::to_string(j) + ": non-finite propensity at the initial state");
    if (a0 < 0.0) warnings_.push_back("reaction " + std::to_string(j) + ": negative propensity at the initial state");
  }
}

std::optional<std::size_t> Network::species_index(std::string_view name) const {
  auto it = std::find(species_.begin(), species_.end(), name);
  if (it == species_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - species_.begin());
}

std::optional<std::size_t> Network::parameter_index(std::string_view name) const {
  auto it = std::find(parameters_.begin(), parameters_.end(), name);
  if (it == parameters_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - parameters_.begin());
}

double Network::propensity(std::size_t j, ConstVectorRef x, ConstVectorRef c, EvalCounters* counters) const {
  double a = 0.0;
  try {
    a = reactions_[j].rate.evaluate({x.data(), static_cast<std::size_t>(x.size())},
                                    {c.data(), static_cast<std::size_t>(c.size())});
  } catch (const EvalError& e) {
    throw EvalError("reaction " + std::to_string(j) + ": " + e.what());
  }
  if (a < 0.0) {
    if (counters != nullptr) ++counters->clamped;
    return 0.0;
  }
  return a;
}

void Network::propensities(ConstVectorRef x, ConstVectorRef c, Eigen::Ref<Vector> out, EvalCounters* counters) const {
  for (std::size_t j = 0; j < reactions_.size(); ++j) out[static_cast<Eigen::Index>(j)] = propensity(j, x, c, counters);
}

double Network::propensity_gradient(std::size_t j, ConstVectorRef x, ConstVectorRef c, SparseGradient& grad) const {
  const Expr& rate = reactions_[j].rate;
  grad.index = rate.parameter_refs();
  grad.value.assign(grad.index.size(), 0.0);
  double a = 0.0;
  try {
    a = rate.gradient({x.data(), static_cast<std::size_t>(x.size())}, {c.data(), static_cast<std::size_t>(c.size())},
                      grad.value, {});
  } catch (const EvalError& e) {
    throw EvalError("reaction " + std::to_string(j) + ": " + e.what());
  }
  if (a < 0.0) {
    std::fill(grad.value.begin(), grad.value.end(), 0.0);
    return 0.0;
  }
  return a;
}

SparseGradient Network::grad_log_propensity(std::size_t j, ConstVectorRef x, ConstVectorRef c) const {
  SparseGradient g;
  const double a = propensity_gradient(j, x, c, g);
  if (a == 0.0) throw EvalError("reaction " + std::to_string(j) + ": zero propensity, gradient of log undefined");
  for (double& v : g.value) v /= a;
  return g;
}

double Network::propensity_state_gradient(std::size_t j, ConstVectorRef x, ConstVectorRef c,
                                          std::vector<double>& d_dx) const {
  const Expr& rate = reactions_[j].rate;
  d_dx.assign(rate.species_refs().size(), 0.0);
  double a = 0.0;
  try {
    a = rate.gradient({x.data(), static_cast<std::size_t>(x.size())}, {c.data(), static_cast<std::size_t>(c.size())}, {},
                      d_dx);
  } catch (const EvalError& e) {
    throw EvalError("reaction " + std::to_string(j) + ": " + e.what());
  }
  if (a < 0.0) {
    std::fill(d_dx.begin(), d_dx.end(), 0.0);
    return 0.0;
  }
  return a;
}

Vector Network::drift(ConstVectorRef x, ConstVectorRef c) const {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(species_.size()));
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    const double a = propensity(j, x, c);
    for (const StoichEntry& e : reactions_[j].change) b[static_cast<Eigen::Index>(e.species)] += e.count * a;
  }
  return b;
}

Matrix Network::diffusion_matrix(ConstVectorRef x, ConstVectorRef c) const {
  const auto d = static_cast<Eigen::Index>(species_.size());
  Matrix sigma = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < reactions_.size(); ++j) {
    const double a = propensity(j, x, c);
    if (a == 0.0) continue;
    const StoichColumn& nu = reactions_[j].change;
    for (const StoichEntry& p : nu)
      for (const StoichEntry& q : nu)
        sigma(static_cast<Eigen::Index>(p.species), static_cast<Eigen::Index>(q.species)) +=
            a * static_cast<double>(p.count) * static_cast<double>(q.count);
  }
  return sigma;
}

Eigen::MatrixXi Network::stoichiometry() const {
  Eigen::MatrixXi nu = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(species_.size()),
                                             static_cast<Eigen::Index>(reactions_.size()));
  for (std::size_t j = 0; j < reactions_.size(); ++j)
    for (const StoichEntry& e : reactions_[j].change)
      nu(static_cast<Eigen::Index>(e.species), static_cast<Eigen::Index>(j)) = e.count;
  return nu;
}

Network Network::with_parameters(const Vector& c) const {
  if (c.size() != c_.size()) throw ModelError("dimension mismatch: parameter vector length");
  Network copy = *this;
  copy.c_ = c;
  return copy;
}

}  // namespace netreduce
