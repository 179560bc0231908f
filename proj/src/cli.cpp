#include "netreduce/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <sstream>

#include "netreduce/fim.hpp"
#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "netreduce/pipeline.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/simulate.hpp"
#include "netreduce/train.hpp"
#include "netreduce/validate.hpp"

namespace netreduce {

namespace {

namespace fs = std::filesystem;

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const Json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

TimeSeries load_data(const std::string& path, const Network& net, const std::string& kind) {
  return align_series(read_csv(path, series_kind_from_string(kind)), net.species_names());
}

const std::vector<std::string> kMethods{"ode", "ssa", "tau", "cle"};
const std::vector<std::string> kKinds{"ode", "ssa", "tau", "cle", "external"};

struct SimulateArgs {
  std::string model, method = "ode", out;
  double t_end = 10.0, dt = 1e-2, kurtz_n = 0.0;
  std::uint64_t seed = 0;
  std::size_t ensemble = 0;
  unsigned threads = 1;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Network net = load_model(a.model);
  if (a.kurtz_n > 0.0) net = kurtz_scale(net, a.kurtz_n);
  const SimulationSpec spec{method_from_string(a.method), a.t_end, a.dt};
  if (a.ensemble > 0) {
    const Ensemble ens = simulate_ensemble(net, spec, a.ensemble, a.seed, a.threads);
    write_ensemble(a.out, ens, net, spec, a.seed, a.kurtz_n);
    out << "wrote " << a.ensemble << " trajectories to " << a.out << "\n";
  } else {
    write_csv(a.out, simulate(net, spec, a.seed));
    out << "wrote " << a.out << "\n";
  }
  return 0;
}

struct FimArgs {
  std::string model, data, stochastic, out;
  bool natural = false;
};

int cmd_fim(const FimArgs& a, std::ostream& out) {
  Network net = load_model(a.model);
  Json doc;
  if (!a.stochastic.empty()) {
    const Json manifest = read_json(a.stochastic);
    if (manifest.contains("kurtz_N")) net = kurtz_scale(net, manifest.at("kurtz_N").get<double>());
    Ensemble ens = load_ensemble(a.stochastic);
    for (TimeSeries& m : ens.members) m = align_series(m, net.species_names());
    const InformationRanking r = fim_diag_stochastic(net, net.parameter_values(), ens, !a.natural);
    doc = fim_to_json(r, nullptr, net.parameter_names());
  } else {
    const TimeSeries ts = load_data(a.data, net, "external");
    const InformationRanking r = fim_diag_mean_field(net, net.parameter_values(), ts, !a.natural);
    const FimBlocks blocks = fim_blocks_mean_field(net, net.parameter_values(), ts, !a.natural);
    doc = fim_to_json(r, &blocks, net.parameter_names());
  }
  write_json(a.out, doc);
  out << "wrote " << a.out << "\n";
  return 0;
}

InformationRanking ranking_from_fim_json(const Json& doc, const Network& net) {
  InformationRanking r;
  try {
    r.xi = to_eigen(doc.at("xi").get<std::vector<double>>());
    r.log_scale = doc.value("scale", std::string("log")) == "log";
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed fim report: ") + e.what());
  }
  if (static_cast<std::size_t>(r.xi.size()) != net.num_parameters())
    throw std::runtime_error("fim report has " + std::to_string(r.xi.size()) + " entries, model has " +
                             std::to_string(net.num_parameters()) + " parameters");
  r.finalize();
  return r;
}

std::vector<std::size_t> species_indices(const Network& net, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const std::string& n : names) {
    const auto i = net.species_index(n);
    if (!i) throw std::runtime_error("unknown species '" + n + "'");
    idx.push_back(*i);
  }
  return idx;
}

struct ReduceArgs {
  std::string model, fim, data, out, data_kind = "external";
  double kappa = 0.95;
  std::vector<std::string> augment;
};

int cmd_reduce(const ReduceArgs& a, std::ostream& out) {
  const Network net = load_model(a.model);
  const InformationRanking r = ranking_from_fim_json(read_json(a.fim), net);
  const IndexSet P = rank_and_select(r, a.kappa);
  const TimeSeries ts = load_data(a.data, net, a.data_kind);
  const IndexSet J = select_reactions(net, P);
  ReductionMaps maps = build_maps(net, P, J, select_species(net, J), time_average(ts), a.data);
  for (std::size_t i : species_indices(net, a.augment)) maps = augment_with_species(net, maps, i);
  const ReducedModel reduced = build_reduced_model(net, maps);
  write_json(a.out, reduced_to_json(net, reduced));
  out << "reduced model: J=" << maps.num_reactions() << " K=" << maps.num_parameters() << " d=" << maps.num_species()
      << "\nwrote " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string model, reduced, data, out, optimizer = "nelder-mead";
  double lambda = 0.0, tol = 1e-12;
  std::size_t max_iter = 20000;
  bool full_loss = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const Network net = load_model(a.model);
  const ReducedModel reduced = load_reduced(a.reduced);
  const TimeSeries ts = load_data(a.data, net, "external");
  TrainOptions opts;
  opts.optimizer = optimizer_from_string(a.optimizer);
  opts.lambda = a.lambda;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.compute_full_loss = a.full_loss;
  const TrainingResult fit = train(reduced, net, net.parameter_values(), ts, opts);
  write_json(a.out, fitted_to_json(net, apply_fit(reduced, fit), fit));
  out << "loss=" << format_number(fit.loss_value) << " iterations=" << fit.iterations
      << " converged=" << (fit.converged ? "true" : "false") << "\nwrote " << a.out << "\n";
  return 0;
}

struct ValidateArgs {
  std::string model, fitted, out, data, plot_data;
  std::vector<std::string> species;
  double tol = 0.05, t_end = 10.0, dt = 1e-2;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const Network net = load_model(a.model);
  const Json doc = read_json(a.fitted);
  const ReducedModel fitted = reduced_from_json(doc);
  std::optional<double> loss;
  if (doc.contains("training")) loss = doc.at("training").value("loss", 0.0);
  std::vector<std::string> species = a.species;
  if (species.empty()) species = fitted.network.species_names();
  ValidationOptions opts;
  opts.tol = a.tol;
  opts.t_end = a.t_end;
  opts.dt = a.dt;
  TimeSeries data;
  if (!a.data.empty()) {
    data = load_data(a.data, net, "external");
    opts.reference_data = &data;
  }
  const ValidationRun run = validate_reduction(net, fitted, species, opts, loss);
  const std::string text = report_to_json(run.report).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text_file(a.out, text);
    out << "decision: " << (run.report.pass ? "pass" : "fail") << "\nwrote " << a.out << "\n";
  }
  if (!a.plot_data.empty()) write_text_file(a.plot_data, plot_data_csv(run.full, run.reduced));
  return 0;
}

struct BootstrapArgs {
  std::string manifest, out, per_trajectory;
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
  double burn_in = 0.0, level = 0.95;
};

int cmd_bootstrap(const BootstrapArgs& a, std::ostream& out) {
  Ensemble ens = load_ensemble(a.manifest);
  if (a.burn_in > 0.0)
    for (TimeSeries& m : ens.members) m = window(m, a.burn_in);
  const BootstrapSummary s = bootstrap_time_average(ens, a.resamples, a.seed, a.level);
  Json doc = bootstrap_to_json(s);
  doc["burn_in"] = a.burn_in;
  write_json(a.out, doc);
  if (!a.per_trajectory.empty()) write_text_file(a.per_trajectory, per_trajectory_csv(s));
  out << "wrote " << a.out << "\n";
  return 0;
}

struct PipelineArgs {
  std::string model, data, out, method = "ode", optimizer = "nelder-mead";
  std::vector<double> ladder{0.93, 0.95, 0.97, 0.99};
  std::vector<std::string> species, augment;
  double tol = 0.05, t_end = 10.0, dt = 1e-2, lambda = 0.0, train_tol = 1e-12;
  std::size_t max_iter = 20000;
  std::uint64_t seed = 0;
  bool natural = false, all = false;
};

int cmd_pipeline(const PipelineArgs& a, std::ostream& out) {
  const Network net = load_model(a.model);
  PipelineConfig cfg;
  cfg.kappa_ladder = a.ladder;
  cfg.tol = a.tol;
  cfg.log_scale = !a.natural;
  cfg.train.optimizer = optimizer_from_string(a.optimizer);
  cfg.train.lambda = a.lambda;
  cfg.train.tol = a.train_tol;
  cfg.train.max_iter = a.max_iter;
  cfg.data_spec = {method_from_string(a.method), a.t_end, a.dt};
  cfg.seed = a.seed;
  cfg.species_set = a.species;
  cfg.augment = a.augment;
  cfg.stop_at_first_pass = !a.all;

  TimeSeries data;
  if (!a.data.empty()) data = load_data(a.data, net, "external");
  const PipelineResult res = run_pipeline(net, cfg, a.data.empty() ? nullptr : &data);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (a.data.empty()) write_csv((dir / "data.csv").string(), res.data);
  write_json((dir / "fim.json").string(), fim_to_json(res.ranking, &res.blocks, net.parameter_names()));
  for (const PipelineRow& row : res.rows) {
    const std::string tag = row.label;
    write_json((dir / ("fitted_" + tag + ".json")).string(), fitted_to_json(net, row.fitted, row.fit));
    write_json((dir / ("report_" + tag + ".json")).string(), report_to_json(row.report));
  }
  const std::string table = summary_table(res);
  write_text_file((dir / "summary.csv").string(), summary_csv(res));
  write_text_file((dir / "summary.txt").string(), table);
  out << table;
  if (!res.accepted) {
    out << "no reduced model met TOL=" << format_number(a.tol) << "\n";
    return 1;
  }
  out << "accepted: " << res.rows[*res.accepted].label << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-based reduction of reaction network models", "netreduce"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "netreduce 0.1.0");

  auto positive = CLI::PositiveNumber;
  auto existing = CLI::ExistingFile;

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a model (ODE, SSA, tau-leap or CLE)");
  s->add_option("--model", sim.model, "Model JSON")->required()->check(existing);
  s->add_option("--method", sim.method, "Simulation method")->check(CLI::IsMember(kMethods))->capture_default_str();
  s->add_option("--t-end", sim.t_end, "Final time")->check(positive)->capture_default_str();
  s->add_option("--dt", sim.dt, "Step size (ignored by ssa)")->check(positive)->capture_default_str();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--ensemble", sim.ensemble, "Number of trajectories; output becomes a directory");
  s->add_option("--kurtz-N", sim.kurtz_n, "System size for the count-valued scaling")->check(positive);
  s->add_option("--threads", sim.threads, "Worker threads for ensembles")->check(CLI::Range(1u, 256u));
  s->add_option("--out", sim.out, "Output CSV, or directory with --ensemble")->required();

  FimArgs fim;
  auto* f = app.add_subcommand("fim", "Estimate the pathwise Fisher information from data");
  f->add_option("--model", fim.model, "Model JSON")->required()->check(existing);
  auto* fdata = f->add_option("--data", fim.data, "Time-series CSV")->check(existing);
  auto* fstoch = f->add_option("--stochastic", fim.stochastic, "SSA ensemble manifest")->check(existing);
  fdata->excludes(fstoch);
  f->add_flag("--natural-scale", fim.natural, "Report natural-parameter scale instead of log scale");
  f->add_option("--out", fim.out, "Output fim.json")->required();

  ReduceArgs red;
  auto* r = app.add_subcommand("reduce", "Build a reduced model from a FIM report");
  r->add_option("--model", red.model, "Model JSON")->required()->check(existing);
  r->add_option("--fim", red.fim, "fim.json")->required()->check(existing);
  r->add_option("--kappa", red.kappa, "Information threshold in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  r->add_option("--data", red.data, "Time-series CSV for frozen species")->required()->check(existing);
  r->add_option("--data-kind", red.data_kind, "How the data were produced")->check(CLI::IsMember(kKinds));
  r->add_option("--augment", red.augment, "Species whose reactions are added")->delimiter(',');
  r->add_option("--out", red.out, "Output reduced.json")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit reduced-model parameters to data");
  t->add_option("--model", tr.model, "Full model JSON")->required()->check(existing);
  t->add_option("--reduced", tr.reduced, "reduced.json")->required()->check(existing);
  t->add_option("--data", tr.data, "Time-series CSV")->required()->check(existing);
  t->add_option("--lambda", tr.lambda, "Weight of the penalty toward the initial values")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  t->add_option("--optimizer", tr.optimizer, "nelder-mead or gd")
      ->check(CLI::IsMember({"nelder-mead", "gd"}))
      ->capture_default_str();
  t->add_option("--max-iter", tr.max_iter, "Iteration limit")->capture_default_str();
  t->add_option("--tol", tr.tol, "Relative convergence tolerance")->check(positive)->capture_default_str();
  t->add_flag("--full-loss", tr.full_loss, "Also report the relative-entropy form of the loss");
  t->add_option("--out", tr.out, "Output fitted.json")->required();

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Compare full and reduced mean-field trajectories");
  v->add_option("--model", val.model, "Full model JSON")->required()->check(existing);
  v->add_option("--fitted", val.fitted, "fitted.json (or reduced.json)")->required()->check(existing);
  v->add_option("--species-set", val.species, "Comparison species (default: all reduced species)")->delimiter(',');
  v->add_option("--tol", val.tol, "Acceptance tolerance on path-dist")->check(CLI::NonNegativeNumber)->capture_default_str();
  v->add_option("--t-end", val.t_end, "Horizon")->check(positive)->capture_default_str();
  v->add_option("--dt", val.dt, "Step size")->check(positive)->capture_default_str();
  v->add_option("--data", val.data, "Compare against this series instead of the full mean field")->check(existing);
  v->add_option("--emit-plot-data", val.plot_data, "Write t,species,model,value CSV");
  v->add_option("--out", val.out, "Output report.json (default: stdout)");

  BootstrapArgs bs;
  auto* b = app.add_subcommand("bootstrap", "Bootstrap the mean time average of an ensemble");
  b->add_option("--manifest", bs.manifest, "Ensemble manifest.json")->required()->check(existing);
  b->add_option("--resamples", bs.resamples, "Number of resamples")->check(CLI::Range(100, 100000000))->capture_default_str();
  b->add_option("--seed", bs.seed, "Random seed")->capture_default_str();
  b->add_option("--burn-in", bs.burn_in, "Discard records before this time")->check(CLI::NonNegativeNumber);
  b->add_option("--level", bs.level, "Confidence level")->check(CLI::Range(0.5, 0.999))->capture_default_str();
  b->add_option("--per-trajectory", bs.per_trajectory, "Write per-trajectory time averages as CSV");
  b->add_option("--out", bs.out, "Output bootstrap.json")->required();

  PipelineArgs pl;
  auto* p = app.add_subcommand("pipeline", "FIM, reduce, train and validate over a ladder of thresholds");
  p->add_option("--model", pl.model, "Model JSON")->required()->check(existing);
  p->add_option("--data", pl.data, "Time-series CSV (default: simulate the model)")->check(existing);
  p->add_option("--method", pl.method, "Method for generated data")->check(CLI::IsMember(kMethods))->capture_default_str();
  p->add_option("--t-end", pl.t_end, "Horizon for generated data")->check(positive)->capture_default_str();
  p->add_option("--dt", pl.dt, "Step size for generated data and validation")->check(positive)->capture_default_str();
  p->add_option("--seed", pl.seed, "Random seed")->capture_default_str();
  p->add_option("--kappa-ladder", pl.ladder, "Thresholds tried in ascending order")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  p->add_option("--tol", pl.tol, "Acceptance tolerance on path-dist")->check(positive)->capture_default_str();
  p->add_option("--species-set", pl.species, "Comparison species (default: species of the first model)")->delimiter(',');
  p->add_option("--optimizer", pl.optimizer, "nelder-mead or gd")->check(CLI::IsMember({"nelder-mead", "gd"}));
  p->add_option("--lambda", pl.lambda, "Penalty weight")->check(CLI::NonNegativeNumber);
  p->add_option("--max-iter", pl.max_iter, "Iteration limit");
  p->add_option("--train-tol", pl.train_tol, "Training tolerance")->check(positive);
  p->add_option("--augment", pl.augment, "Species to augment after the ladder")->delimiter(',');
  p->add_flag("--natural-scale", pl.natural, "Rank parameters in natural scale");
  p->add_flag("--all", pl.all, "Evaluate every threshold instead of stopping at the first pass");
  p->add_option("--out", pl.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, out);
    if (f->parsed()) {
      if (fim.data.empty() && fim.stochastic.empty()) {
        err << "error: fim needs --data or --stochastic\n";
        return 2;
      }
      return cmd_fim(fim, out);
    }
    if (r->parsed()) {
      if (!(red.kappa > 0.0)) {
        err << "error: --kappa must be positive\n";
        return 2;
      }
      return cmd_reduce(red, out);
    }
    if (t->parsed()) return cmd_train(tr, out);
    if (v->parsed()) return cmd_validate(val, out);
    if (b->parsed()) return cmd_bootstrap(bs, out);
    if (p->parsed()) return cmd_pipeline(pl, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace netreduce
