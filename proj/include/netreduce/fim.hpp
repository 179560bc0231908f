#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/timeseries.hpp"

namespace netreduce {

/// Zero propensity with a nonzero parameter derivative at some sample.
class FimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diagonal of the pathwise Fisher information and the ranking it induces.
struct InformationRanking {
  Vector xi;                       // length K, nonnegative
  std::vector<std::size_t> order;  // descending xi, ties by ascending index
  std::vector<double> cumulative;  // fraction of the trace held by the first n+1 ranked parameters
  bool log_scale = true;
  Vector std_error;                // per-entry standard error; empty for mean-field estimates
  std::size_t members = 0;         // ensemble size for stochastic estimates

  /// Fills order and cumulative from xi.
  void finalize();
  double trace() const { return xi.sum(); }
};

struct FimBlock {
  std::vector<std::size_t> params;  // ascending
  Matrix matrix;                    // dense over params
};

/// Block-diagonal information matrix; parameters are grouped when some reaction
/// depends on both, transitively.
struct FimBlocks {
  std::size_t num_parameters = 0;
  bool log_scale = true;
  std::vector<FimBlock> blocks;  // ordered by smallest parameter

  Matrix dense() const;
  Vector diagonal() const;
};

/// Parameter groups: connected components of "referenced by the same reaction".
std::vector<std::vector<std::size_t>> parameter_blocks(const Network& net);

InformationRanking fim_diag_mean_field(const Network& net, ConstVectorRef c, const TimeSeries& ts,
                                       bool log_scale = true);

FimBlocks fim_blocks_mean_field(const Network& net, ConstVectorRef c, const TimeSeries& ts, bool log_scale = true);

/// Per-path estimator averaged over an SSA ensemble, with standard errors.
InformationRanking fim_diag_stochastic(const Network& net, ConstVectorRef c, const Ensemble& ens,
                                       bool log_scale = true);

/// Smallest leading set of ranked parameters whose cumulative share reaches kappa.
/// kappa = 1 selects every parameter. Result is ascending.
std::vector<std::size_t> rank_and_select(const InformationRanking& ranking, double kappa);

/// share_j = sum of xi over the parameters of reaction j, over the same sum for all reactions.
Vector reaction_information_share(const Network& net, const InformationRanking& ranking);

struct AdjointResult {
  Vector time_average;  // d
  Matrix sensitivity;   // d x K, derivative of the time average w.r.t. log c_k
};

/// Forward sensitivities of the ODE time average, integrated with RK4 alongside the state.
AdjointResult adjoint_sensitivities(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, double dt);

struct SensitivityBoundEntry {
  std::size_t parameter = 0;
  double index = 0.0;   // |dE[F]/dlog c_k| / sd(F)
  double bound = 0.0;   // sqrt(xi_k) + 3 combined standard errors
  bool holds = false;
};

struct SensitivityBoundReport {
  std::size_t species = 0;
  double mean_f = 0.0;
  double sd_f = 0.0;
  std::vector<SensitivityBoundEntry> entries;
};

/// Checks |D_{F,k}| <= sqrt(xi_k) for F the time average of one species, using
/// the ODE sensitivity as numerator and ensemble statistics for sd(F) and xi.
SensitivityBoundReport sensitivity_bound_check(const Network& net, const Ensemble& ssa, std::size_t species,
                                               double ode_dt);

Json fim_to_json(const InformationRanking& ranking, const FimBlocks* blocks, const std::vector<std::string>& names);

}  // namespace netreduce
