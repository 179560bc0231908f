#include "netreduce/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace netreduce {

std::string kappa_label(double kappa) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", kappa * 100.0);
  return buf;
}

namespace {

PipelineRow evaluate(const Network& net, const ReducedModel& reduced, const TimeSeries& data, const PipelineConfig& cfg,
                     const std::vector<std::string>& species_set, const ValidationOptions& vopts) {
  PipelineRow row;
  row.fit = train(reduced, net, net.parameter_values(), data, cfg.train);
  row.fitted = apply_fit(reduced, row.fit);
  row.report = validate_reduction(net, row.fitted, species_set, vopts, row.fit.loss_value).report;
  row.reactions = reduced.maps.num_reactions();
  row.parameters = reduced.maps.num_parameters();
  row.species = reduced.maps.num_species();
  row.loss = row.fit.loss_value;
  row.path_dist = row.report.path_dist;
  row.ss_dist = row.report.ss_dist;
  row.pass = row.report.pass;
  return row;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

PipelineResult run_pipeline(const Network& net, const PipelineConfig& cfg, const TimeSeries* data) {
  if (cfg.kappa_ladder.empty()) throw std::invalid_argument("empty kappa ladder");
  for (double k : cfg.kappa_ladder)
    if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("kappa values must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("TOL must be positive");
  std::vector<double> ladder = cfg.kappa_ladder;
  std::sort(ladder.begin(), ladder.end());

  PipelineResult res;
  if (data) {
    res.data = align_series(*data, net.species_names());
  } else {
    res.data = simulate(net, cfg.data_spec, cfg.seed);
  }
  const Vector& c = net.parameter_values();
  res.ranking = fim_diag_mean_field(net, c, res.data, cfg.log_scale);
  res.blocks = fim_blocks_mean_field(net, c, res.data, cfg.log_scale);

  ValidationOptions vopts;
  vopts.t_end = res.data.times.back();
  vopts.dt = cfg.data_spec.dt;
  vopts.tol = cfg.tol;

  res.species_set = cfg.species_set;
  for (double kappa : ladder) {
    const IndexSet P = rank_and_select(res.ranking, kappa);
    const ReducedModel reduced = reduce(net, P, res.data);
    if (res.species_set.empty()) res.species_set = reduced.network.species_names();
    PipelineRow row = evaluate(net, reduced, res.data, cfg, res.species_set, vopts);
    row.label = kappa_label(kappa);
    row.kappa = kappa;
    res.rows.push_back(std::move(row));
    if (res.rows.back().pass && !res.accepted) {
      res.accepted = res.rows.size() - 1;
      if (cfg.stop_at_first_pass) break;
    }
  }

  if (!cfg.augment.empty()) {
    const PipelineRow& base = res.accepted ? res.rows[*res.accepted] : res.rows.back();
    ReductionMaps maps = base.fitted.maps;
    for (const std::string& name : cfg.augment) {
      const auto idx = net.species_index(name);
      if (!idx) throw std::invalid_argument("unknown species '" + name + "' for augmentation");
      maps = augment_with_species(net, maps, *idx);
    }
    const ReducedModel augmented = build_reduced_model(net, maps);
    PipelineRow row = evaluate(net, augmented, res.data, cfg, res.species_set, vopts);
    row.label = base.label + "+aug";
    row.kappa = base.kappa;
    res.rows.push_back(std::move(row));
    if (res.rows.back().pass && !res.accepted) res.accepted = res.rows.size() - 1;
  }
  return res;
}

std::string summary_csv(const PipelineResult& result) {
  std::string out = "pFIM%,J,K,d,Loss,path-dist,SS-dist,decision\n";
  for (const PipelineRow& r : result.rows)
    out += r.label + "," + std::to_string(r.reactions) + "," + std::to_string(r.parameters) + "," +
           std::to_string(r.species) + "," + format_number(r.loss) + "," + format_number(r.path_dist) + "," +
           format_number(r.ss_dist) + "," + (r.pass ? "pass" : "fail") + "\n";
  return out;
}

std::string summary_table(const PipelineResult& result) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"pFIM %", "J", "K", "d", "Loss", "path-dist", "SS-dist", "decision"});
  for (const PipelineRow& r : result.rows)
    cells.push_back({r.label, std::to_string(r.reactions), std::to_string(r.parameters), std::to_string(r.species),
                     fixed(r.loss), fixed(r.path_dist), fixed(r.ss_dist), r.pass ? "pass" : "fail"});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += "  ";
      out += std::string(width[k] - row[k].size(), ' ') + row[k];
    }
    out += "\n";
  }
  return out;
}

}  // namespace netreduce
