#include "netreduce/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "netreduce/simulate.hpp"
#include "rng.hpp"

namespace netreduce {

namespace {

std::size_t column_of(const TimeSeries& ts, const std::string& name) {
  auto it = std::find(ts.species.begin(), ts.species.end(), name);
  return static_cast<std::size_t>(it - ts.species.begin());
}

// (full column, reduced column) for each requested species; throws on missing names.
std::vector<std::pair<std::size_t, std::size_t>> match_columns(const TimeSeries& full, const TimeSeries& reduced,
                                                               const std::vector<std::string>& species) {
  if (species.empty()) throw std::invalid_argument("comparison species set is empty");
  std::string missing_red, missing_full;
  std::vector<std::pair<std::size_t, std::size_t>> cols;
  for (const std::string& s : species) {
    const std::size_t f = column_of(full, s), r = column_of(reduced, s);
    if (f == full.species.size()) missing_full += (missing_full.empty() ? "" : ", ") + s;
    if (r == reduced.species.size()) missing_red += (missing_red.empty() ? "" : ", ") + s;
    cols.emplace_back(f, r);
  }
  if (!missing_red.empty()) throw std::invalid_argument("species not in the reduced model: " + missing_red);
  if (!missing_full.empty()) throw std::invalid_argument("species not in the full model: " + missing_full);
  return cols;
}

void check_same_grid(const TimeSeries& a, const TimeSeries& b) {
  if (a.times.size() != b.times.size()) throw std::invalid_argument("trajectories are on different time grids");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
      throw std::invalid_argument("trajectories are on different time grids");
}

SpeciesDistance& entry(std::vector<SpeciesDistance>* detail, const std::string& name) {
  for (SpeciesDistance& d : *detail)
    if (d.name == name) return d;
  detail->push_back(SpeciesDistance{name});
  return detail->back();
}

}  // namespace

double path_distance(const TimeSeries& full, const TimeSeries& reduced, const std::vector<std::string>& species,
                     std::vector<SpeciesDistance>* detail) {
  const auto cols = match_columns(full, reduced, species);
  check_same_grid(full, reduced);
  std::vector<SpeciesDistance> local;
  if (!detail) detail = &local;
  double worst = 0.0;
  for (std::size_t n = 0; n < cols.size(); ++n) {
    SpeciesDistance& e = entry(detail, species[n]);
    double sup = 0.0;
    for (std::size_t i = 0; i < full.num_records(); ++i) {
      const double z = full.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[n].first));
      const double zr = reduced.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[n].second));
      double q;
      if (z == 0.0) {
        q = std::abs(zr);
        e.zero_reference = true;
      } else {
        q = std::abs(z - zr) / std::abs(z);
      }
      sup = std::max(sup, q);
    }
    e.sup_relative = sup;
    worst = std::max(worst, sup);
  }
  return worst;
}

double steady_state_distance(const TimeSeries& full, const TimeSeries& reduced, const std::vector<std::string>& species,
                             std::vector<SpeciesDistance>* detail) {
  const auto cols = match_columns(full, reduced, species);
  check_same_grid(full, reduced);
  std::vector<SpeciesDistance> local;
  if (!detail) detail = &local;
  const Vector af = time_average(full), ar = time_average(reduced);
  double worst = 0.0;
  for (std::size_t n = 0; n < cols.size(); ++n) {
    SpeciesDistance& e = entry(detail, species[n]);
    const double z = af[static_cast<Eigen::Index>(cols[n].first)];
    const double zr = ar[static_cast<Eigen::Index>(cols[n].second)];
    double q;
    if (z == 0.0) {
      q = std::abs(zr);
      e.zero_average = true;
    } else {
      q = std::abs(z - zr) / std::abs(z);
    }
    e.average_relative = q;
    worst = std::max(worst, q);
  }
  return worst;
}

ValidationRun validate_reduction(const Network& full, const ReducedModel& fitted, const std::vector<std::string>& species,
                                 const ValidationOptions& opts, std::optional<double> loss) {
  if (opts.tol < 0.0) throw std::invalid_argument("TOL must be nonnegative");
  ValidationRun run;
  ValidationReport& rep = run.report;
  std::vector<double> grid;
  if (opts.reference_data) {
    run.full = *opts.reference_data;
    grid = run.full.times;
    rep.reference = "data";
  } else {
    grid = time_grid(opts.t_end, opts.dt);
    try {
      run.full = simulate_ode_on_grid(full, full.parameter_values(), full.initial_state(), grid);
    } catch (const std::exception& e) {
      throw SimulationError(std::string("full model: ") + e.what());
    }
    rep.reference = "mean-field";
  }
  try {
    run.reduced = simulate_ode_on_grid(fitted.network, fitted.network.parameter_values(),
                                       fitted.maps.project_state(full.initial_state()), grid);
  } catch (const std::exception& e) {
    throw SimulationError(std::string("reduced model: ") + e.what());
  }

  rep.path_dist = path_distance(run.full, run.reduced, species, &rep.per_species);
  rep.ss_dist = steady_state_distance(run.full, run.reduced, species, &rep.per_species);
  rep.loss = loss;
  rep.tol = opts.tol;
  rep.pass = rep.path_dist <= opts.tol;
  double worst = -1.0;
  for (const SpeciesDistance& d : rep.per_species)
    if (d.sup_relative > worst) {
      worst = d.sup_relative;
      rep.worst_species = d.name;
    }

  for (std::size_t i : fitted.maps.pi_comp1) {
    const std::string& name = full.species_names()[i];
    const std::size_t col = column_of(run.full, name);
    if (col == run.full.species.size()) continue;
    const auto series = run.full.states.col(static_cast<Eigen::Index>(col));
    const double mean = series.mean();
    const double range = series.maxCoeff() - series.minCoeff();
    const double rel = mean != 0.0 ? range / std::abs(mean) : (range > 0.0 ? INFINITY : 0.0);
    if (rel > opts.frozen_variation_threshold) rep.frozen_variation.push_back({name, mean, rel});
  }
  return run;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapSummary bootstrap_time_average(const Ensemble& ens, std::size_t resamples, std::uint64_t seed, double level) {
  const std::size_t M = ens.members.size();
  if (M < 2) throw std::invalid_argument("bootstrap needs at least two trajectories");
  if (resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  BootstrapSummary out;
  out.species = ens.members.front().species;
  const auto d = static_cast<Eigen::Index>(out.species.size());
  out.per_trajectory.resize(static_cast<Eigen::Index>(M), d);
  for (std::size_t m = 0; m < M; ++m) {
    if (ens.members[m].species != out.species) throw std::invalid_argument("ensemble members disagree on species");
    out.per_trajectory.row(static_cast<Eigen::Index>(m)) = time_average(ens.members[m]).transpose();
  }
  out.resamples = resamples;
  out.members = M;
  out.seed = seed;
  out.level = level;

  auto mean_of = [&](const std::vector<std::size_t>& idx, Eigen::Index k) {
    double s = 0.0;
    for (std::size_t m : idx) s += out.per_trajectory(static_cast<Eigen::Index>(m), k);
    return s / static_cast<double>(idx.size());
  };
  std::vector<std::size_t> all(M);
  for (std::size_t m = 0; m < M; ++m) all[m] = m;
  out.mean.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) out.mean[k] = mean_of(all, k);

  std::vector<std::vector<double>> stats(static_cast<std::size_t>(d), std::vector<double>(resamples));
  std::vector<std::size_t> idx(M);
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng(splitmix64(seed) + b);
    for (std::size_t m = 0; m < M; ++m) idx[m] = rng.index(M);
    for (Eigen::Index k = 0; k < d; ++k) stats[static_cast<std::size_t>(k)][b] = mean_of(idx, k);
  }
  const double alpha = 0.5 * (1.0 - level);
  out.lower.resize(d);
  out.upper.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto& s = stats[static_cast<std::size_t>(k)];
    out.lower[k] = std::min(quantile(s, alpha), out.mean[k]);
    out.upper[k] = std::max(quantile(s, 1.0 - alpha), out.mean[k]);
  }
  return out;
}

Json report_to_json(const ValidationReport& r) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["reference"] = r.reference;
  doc["path_dist"] = r.path_dist;
  doc["ss_dist"] = r.ss_dist;
  doc["loss"] = r.loss ? Json(*r.loss) : Json(nullptr);
  doc["tol"] = r.tol;
  doc["decision"] = r.pass ? "pass" : "fail";
  doc["worst_species"] = r.worst_species;
  Json per = Json::array();
  for (const SpeciesDistance& d : r.per_species) {
    Json e = {{"species", d.name}, {"sup_relative", d.sup_relative}, {"average_relative", d.average_relative}};
    Json flags = Json::array();
    if (d.zero_reference) flags.push_back("zero_reference");
    if (d.zero_average) flags.push_back("zero_average");
    e["flags"] = flags;
    per.push_back(e);
  }
  doc["per_species"] = per;
  Json frozen = Json::array();
  for (const FrozenVariation& f : r.frozen_variation)
    frozen.push_back({{"species", f.name}, {"mean", f.mean}, {"relative_range", f.relative_range}});
  doc["frozen_species_with_high_variation"] = frozen;
  return doc;
}

Json bootstrap_to_json(const BootstrapSummary& s) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["members"] = s.members;
  doc["resamples"] = s.resamples;
  doc["seed"] = s.seed;
  doc["level"] = s.level;
  doc["method"] = "percentile";
  Json rows = Json::array();
  for (std::size_t k = 0; k < s.species.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    rows.push_back({{"species", s.species[k]}, {"mean", s.mean[kk]}, {"lower", s.lower[kk]}, {"upper", s.upper[kk]}});
  }
  doc["species"] = rows;
  return doc;
}

std::string plot_data_csv(const TimeSeries& full, const TimeSeries& reduced) {
  std::string out = "t,species,model,value\n";
  auto emit = [&](const TimeSeries& ts, const char* model) {
    for (std::size_t k = 0; k < ts.num_species(); ++k)
      for (std::size_t i = 0; i < ts.num_records(); ++i)
        out += format_number(ts.times[i]) + "," + ts.species[k] + "," + model + "," +
               format_number(ts.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) + "\n";
  };
  emit(full, "full");
  emit(reduced, "reduced");
  return out;
}

std::string per_trajectory_csv(const BootstrapSummary& s) {
  std::string out = "trajectory";
  for (const std::string& name : s.species) out += "," + name;
  out += "\n";
  for (Eigen::Index m = 0; m < s.per_trajectory.rows(); ++m) {
    out += std::to_string(m);
    for (Eigen::Index k = 0; k < s.per_trajectory.cols(); ++k) out += "," + format_number(s.per_trajectory(m, k));
    out += "\n";
  }
  return out;
}

}  // namespace netreduce
