#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/timeseries.hpp"

namespace netreduce {

struct SpeciesDistance {
  std::string name;
  double sup_relative = 0.0;      // sup over time of |z - z_red| / z
  double average_relative = 0.0;  // |avg z - avg z_red| / avg z
  bool zero_reference = false;    // some z(t) = 0; the quotient fell back to |z_red|
  bool zero_average = false;      // avg z = 0; absolute difference reported
};

/// A frozen species whose full-model trajectory moves a lot relative to its mean.
struct FrozenVariation {
  std::string name;
  double mean = 0.0;
  double relative_range = 0.0;  // (max - min) / |mean|
};

struct ValidationReport {
  double path_dist = 0.0;
  double ss_dist = 0.0;
  std::vector<SpeciesDistance> per_species;
  std::optional<double> loss;
  double tol = 0.0;
  bool pass = false;
  std::string worst_species;
  std::vector<FrozenVariation> frozen_variation;
  std::string reference;  // "mean-field" or "data"
};

/// Max over the named species of sup_t |z - z_red| / z, with |z_red| used where z = 0.
/// Both series must share their time grid.
double path_distance(const TimeSeries& full, const TimeSeries& reduced, const std::vector<std::string>& species,
                     std::vector<SpeciesDistance>* detail = nullptr);

/// Max over the named species of the relative difference of time averages.
double steady_state_distance(const TimeSeries& full, const TimeSeries& reduced, const std::vector<std::string>& species,
                             std::vector<SpeciesDistance>* detail = nullptr);

struct ValidationOptions {
  double t_end = 10.0;
  double dt = 1e-2;
  double tol = 0.05;
  double frozen_variation_threshold = 0.5;
  const TimeSeries* reference_data = nullptr;  // compare against data instead of the full mean field
};

struct ValidationRun {
  ValidationReport report;
  TimeSeries full;
  TimeSeries reduced;
};

/// Simulates both mean fields on one grid (reduced start = Pi x0) and compares them.
ValidationRun validate_reduction(const Network& full, const ReducedModel& fitted, const std::vector<std::string>& species,
                                 const ValidationOptions& opts, std::optional<double> loss = std::nullopt);

struct BootstrapSummary {
  std::vector<std::string> species;
  Vector mean;
  Vector lower;
  Vector upper;
  std::size_t resamples = 0;
  std::size_t members = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  StateMatrix per_trajectory;  // members x species time averages
};

/// Percentile bootstrap of the ensemble-mean time average of every species.
BootstrapSummary bootstrap_time_average(const Ensemble& ens, std::size_t resamples, std::uint64_t seed,
                                        double level = 0.95);

/// Type-7 sample quantile of unsorted data.
double quantile(std::vector<double> values, double p);

Json report_to_json(const ValidationReport& report);
Json bootstrap_to_json(const BootstrapSummary& summary);
/// Tidy CSV with columns t,species,model,value.
std::string plot_data_csv(const TimeSeries& full, const TimeSeries& reduced);
/// CSV with columns trajectory,<species...>.
std::string per_trajectory_csv(const BootstrapSummary& summary);

}  // namespace netreduce
