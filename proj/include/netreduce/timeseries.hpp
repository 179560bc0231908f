#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace netreduce {

using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SeriesKind { ode, ssa, tau, cle, external };

std::string to_string(SeriesKind kind);
SeriesKind series_kind_from_string(const std::string& s);

/// Records (t_i, x_i), i = 0..T, with strictly increasing, possibly non-uniform times.
struct TimeSeries {
  std::vector<std::string> species;
  std::vector<double> times;
  StateMatrix states;  // (T+1) x d
  SeriesKind kind = SeriesKind::external;

  // Simulation metadata.
  std::uint64_t seed = 0;
  std::string rng;
  std::size_t clipped = 0;  // negative populations clipped to zero
  std::size_t clamped = 0;  // negative propensities clamped to zero

  std::size_t num_records() const { return times.size(); }
  std::size_t num_species() const { return species.size(); }
  double dt(std::size_t i) const { return times[i] - times[i - 1]; }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
  Eigen::VectorXd state(std::size_t i) const { return states.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Throws std::invalid_argument on inconsistent lengths, non-increasing times or non-finite states.
  void validate() const;
};

/// Time average weighted by the recorded steps. Jump-process paths are integrated
/// as piecewise constant (state held over each interval); continuous-kind paths
/// use the trapezoidal rule. Normalized by the elapsed time.
Eigen::VectorXd time_average(const TimeSeries& ts);

/// Concatenate b after a; b must start at a's last record, which is not repeated.
TimeSeries concatenate(const TimeSeries& a, const TimeSeries& b);

/// Columns reordered to the given species names; throws listing names absent from ts.
TimeSeries align_series(const TimeSeries& ts, const std::vector<std::string>& species);

/// Part of the series from t_start on. A record is inserted at t_start when needed:
/// the held state for jump processes, linear interpolation otherwise.
TimeSeries window(const TimeSeries& ts, double t_start);

struct Ensemble {
  std::vector<TimeSeries> members;
  std::vector<std::uint64_t> seeds;
};

/// CSV with header `t,<species...>`, shortest round-trip decimals.
std::string to_csv(const TimeSeries& ts);
TimeSeries from_csv(const std::string& text, SeriesKind kind = SeriesKind::external);
void write_csv(const std::string& path, const TimeSeries& ts);
TimeSeries read_csv(const std::string& path, SeriesKind kind = SeriesKind::external);

std::string format_number(double v);

}  // namespace netreduce
