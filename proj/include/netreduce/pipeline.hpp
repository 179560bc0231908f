#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netreduce/fim.hpp"
#include "netreduce/network.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/simulate.hpp"
#include "netreduce/train.hpp"
#include "netreduce/validate.hpp"

namespace netreduce {

struct PipelineConfig {
  std::vector<double> kappa_ladder{0.93, 0.95, 0.97, 0.99};
  double tol = 0.05;
  bool log_scale = true;
  TrainOptions train;
  SimulationSpec data_spec{Method::ode, 10.0, 1e-2};  // used when no data series is supplied
  std::uint64_t seed = 0;
  std::vector<std::string> species_set;  // comparison set; empty = species of the first reduced model
  std::vector<std::string> augment;      // species to augment after the ladder
  bool stop_at_first_pass = true;
};

struct PipelineRow {
  std::string label;  // "95", or "95+aug"
  double kappa = 0.0;
  std::size_t reactions = 0;
  std::size_t parameters = 0;
  std::size_t species = 0;
  double loss = 0.0;
  double path_dist = 0.0;
  double ss_dist = 0.0;
  bool pass = false;
  ReducedModel fitted;
  TrainingResult fit;
  ValidationReport report;
};

struct PipelineResult {
  TimeSeries data;
  InformationRanking ranking;
  FimBlocks blocks;
  std::vector<std::string> species_set;
  std::vector<PipelineRow> rows;
  std::optional<std::size_t> accepted;  // index into rows
};

/// FIM, then for each kappa: reduce, train, validate; optional augmentation of the last model.
PipelineResult run_pipeline(const Network& net, const PipelineConfig& cfg, const TimeSeries* data = nullptr);

/// Label of a threshold as a percentage, e.g. 0.95 -> "95".
std::string kappa_label(double kappa);

std::string summary_csv(const PipelineResult& result);
std::string summary_table(const PipelineResult& result);

}  // namespace netreduce
