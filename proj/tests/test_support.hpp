#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "netreduce/network.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/timeseries.hpp"

namespace nrtest {

using netreduce::Expr;
using netreduce::Matrix;
using netreduce::Network;
using netreduce::Reaction;
using netreduce::StoichColumn;
using netreduce::Vector;

struct RandomNetworkOptions {
  std::size_t max_species = 8;
  std::size_t max_reactions = 12;
  // Adds Michaelis-Menten conversions and a reaction whose rate uses two parameters.
  bool nonlinear = false;
};

inline double log_uniform(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(gen));
}

inline std::size_t pick(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
}

/// Random network: each species decays, at least one source, then conversions whose
/// products never outnumber their reactants. All initial values are positive.
inline Network random_network(std::mt19937_64& gen, const RandomNetworkOptions& opt = {}) {
  const std::size_t budget = opt.max_reactions;
  const std::size_t d = pick(gen, 2, std::min<std::size_t>(opt.max_species, budget - 2));
  std::vector<std::string> species;
  Vector x0(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    species.push_back("S" + std::to_string(i));
    x0[static_cast<Eigen::Index>(i)] = log_uniform(gen, 0.5, 2.0);
  }
  std::vector<std::string> params;
  std::vector<double> values;
  std::vector<Reaction> reactions;
  auto new_param = [&](double lo, double hi) {
    params.push_back("k" + std::to_string(params.size()));
    values.push_back(log_uniform(gen, lo, hi));
    return params.size() - 1;
  };
  auto mass_action = [&](const std::string& name, StoichColumn re, StoichColumn pr) {
    const std::size_t k = new_param(0.2, 5.0);
    reactions.push_back(netreduce::make_reaction(name, re, pr, netreduce::mass_action_expr(k, re), k));
  };

  for (std::size_t i = 0; i < d; ++i) mass_action("deg" + std::to_string(i), {{i, 1}}, {});
  const std::size_t sources = pick(gen, 1, std::min<std::size_t>(2, budget - d));
  for (std::size_t s = 0; s < sources; ++s) mass_action("src" + std::to_string(s), {}, {{pick(gen, 0, d - 1), 1}});

  const std::size_t room = budget - reactions.size();
  const std::size_t extra = room == 0 ? 0 : pick(gen, 0, std::min<std::size_t>(room, 5));
  for (std::size_t e = 0; e < extra; ++e) {
    const std::string name = "r" + std::to_string(e);
    const std::size_t a = pick(gen, 0, d - 1);
    std::size_t b = pick(gen, 0, d - 2);
    if (b >= a) ++b;
    const int kind = static_cast<int>(pick(gen, 0, opt.nonlinear ? 3 : 1));
    if (kind == 0) {
      mass_action(name, {{a, 1}}, {{b, 1}});
    } else if (kind == 1) {
      const std::size_t c = pick(gen, 0, d - 1);
      StoichColumn re = a < b ? StoichColumn{{a, 1}, {b, 1}} : StoichColumn{{b, 1}, {a, 1}};
      mass_action(name, re, {{c, 1}});
    } else if (kind == 2) {
      const std::size_t V = new_param(0.5, 5.0);
      const std::size_t Km = new_param(0.2, 3.0);
      const Expr rate = Expr::parameter(V) * Expr::species(a) / (Expr::parameter(Km) + Expr::species(a));
      reactions.push_back(netreduce::make_reaction(name, {{a, 1}}, {{b, 1}}, rate));
    } else {
      // rate shared with an existing parameter, so blocks couple
      const std::size_t k = pick(gen, 0, params.size() - 1);
      const std::size_t k2 = new_param(0.2, 2.0);
      const Expr rate = Expr::parameter(k) * Expr::parameter(k2) * Expr::species(a);
      reactions.push_back(netreduce::make_reaction(name, {{a, 1}}, {{b, 1}}, rate));
    }
  }
  Vector c = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return Network(species, x0, params, c, reactions);
}

/// Sigma(x) = nu diag(a) nu^T from the dense stoichiometry.
inline Matrix dense_diffusion(const Network& net, const Vector& x, const Vector& c) {
  const Eigen::MatrixXd nu = net.stoichiometry().cast<double>();
  Vector a(static_cast<Eigen::Index>(net.num_reactions()));
  for (std::size_t j = 0; j < net.num_reactions(); ++j) a[static_cast<Eigen::Index>(j)] = net.propensity(j, x, c);
  return nu * a.asDiagonal() * nu.transpose();
}

inline Matrix dense_pinv(const Matrix& m) {
  if (m.size() == 0 || m.norm() == 0.0) return Matrix::Zero(m.rows(), m.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  cod.setThreshold(1e-12);
  return cod.pseudoInverse();
}

/// Rows of the selection matrix Pi.
inline Matrix selection(const netreduce::IndexSet& keep, std::size_t d) {
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < keep.size(); ++r) P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(keep[r])) = 1.0;
  return P;
}

/// Simplified loss recomputed with dense linear algebra.
inline double dense_loss(const netreduce::ReducedModel& red, const Network& full, const netreduce::TimeSeries& ts,
                         const Vector& theta) {
  const Matrix Pi = selection(red.maps.pi, full.num_species());
  const Vector& c = full.parameter_values();
  double total = 0.0;
  for (std::size_t i = 1; i < ts.num_records(); ++i) {
    const Vector x = ts.state(i - 1);
    const Matrix W = dense_pinv(Pi * dense_diffusion(full, x, c) * Pi.transpose());
    const Vector r = red.network.drift(Pi * x, theta) - Pi * full.drift(x, c);
    total += 0.5 * r.dot(W * r) * ts.dt(i);
  }
  return total;
}

/// Minimizer of a loss that is quadratic in theta: the drift is linear, so its
/// columns are the drifts at unit parameter vectors; solve the normal equations.
inline Vector least_squares_theta(const netreduce::ReducedModel& red, const Network& full,
                                  const netreduce::TimeSeries& ts) {
  const Matrix Pi = selection(red.maps.pi, full.num_species());
  const Vector& c = full.parameter_values();
  const auto K = static_cast<Eigen::Index>(red.network.num_parameters());
  Matrix H = Matrix::Zero(K, K);
  Vector g = Vector::Zero(K);
  for (std::size_t i = 1; i < ts.num_records(); ++i) {
    const Vector x = ts.state(i - 1);
    const Vector xb = Pi * x;
    Matrix G(xb.size(), K);
    for (Eigen::Index k = 0; k < K; ++k) G.col(k) = red.network.drift(xb, Vector::Unit(K, k));
    const Matrix W = dense_pinv(Pi * dense_diffusion(full, x, c) * Pi.transpose());
    H += ts.dt(i) * G.transpose() * W * G;
    g += ts.dt(i) * G.transpose() * W * (Pi * full.drift(x, c));
  }
  return H.ldlt().solve(g);
}

inline double rel_err(double got, double want) {
  const double scale = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / scale;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("netreduce_" + tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string models_dir() { return NETREDUCE_MODELS_DIR; }

}  // namespace nrtest
