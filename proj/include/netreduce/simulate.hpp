#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/timeseries.hpp"

namespace netreduce {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { ode, ssa, tau, cle };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct SimulationSpec {
  Method method = Method::ode;
  double t_end = 1.0;
  double dt = 1e-2;  // unused by ssa
};

/// Name of the generator behind every stochastic simulator, recorded in outputs.
inline constexpr const char* kRngName = "mt19937_64(splitmix64(seed))";

inline constexpr std::size_t kMaxSsaJumps = 10'000'000;

/// Classical fixed-step RK4 on dz/dt = nu a(z; c); records every step.
TimeSeries simulate_ode(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, double dt);

/// RK4 with one step per interval of an arbitrary increasing grid.
TimeSeries simulate_ode_on_grid(const Network& net, ConstVectorRef c, ConstVectorRef x0, const std::vector<double>& grid);

/// Gillespie direct method; records every jump plus the final time.
TimeSeries simulate_ssa(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, std::uint64_t seed,
                        std::size_t max_jumps = kMaxSsaJumps);

/// Poisson tau-leap with fixed step; negative populations are clipped to zero and counted.
TimeSeries simulate_tau_leap(const Network& net, ConstVectorRef c, ConstVectorRef x0, double dt, double t_end,
                             std::uint64_t seed);

/// Euler-Maruyama on the chemical Langevin equation with one Wiener component per
/// reaction. noise_scale = 0 reduces it to explicit Euler on the rate equations.
TimeSeries simulate_cle(const Network& net, ConstVectorRef c, ConstVectorRef x0, double dt, double t_end,
                        std::uint64_t seed, double noise_scale = 1.0);

/// One run of the given method from the network's nominal parameters and initial state.
TimeSeries simulate(const Network& net, const SimulationSpec& spec, std::uint64_t seed);

/// M runs with seeds base_seed .. base_seed + M - 1. Members depend only on their seed,
/// so the result does not depend on the thread count.
Ensemble simulate_ensemble(const Network& net, const SimulationSpec& spec, std::size_t members,
                           std::uint64_t base_seed, unsigned threads = 1);

/// System-size scaling of a concentration model to a jump process:
/// propensities N a_j(x / N; c), initial state round(N x0).
Network kurtz_scale(const Network& net, double system_size);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Writes member_NNNN.csv files and manifest.json into dir.
void write_ensemble(const std::string& dir, const Ensemble& ens, const Network& net, const SimulationSpec& spec,
                    std::uint64_t base_seed, double kurtz_n = 0.0);
/// Reads an ensemble back from its manifest.json.
Ensemble load_ensemble(const std::string& manifest_path);

/// Uniform time grid 0, dt, 2dt, ..., with the last point exactly t_end.
std::vector<double> time_grid(double t_end, double dt);

}  // namespace netreduce
