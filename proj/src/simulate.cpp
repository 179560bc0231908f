#include "netreduce/simulate.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "rng.hpp"

namespace netreduce {

std::string to_string(Method m) {
  switch (m) {
    case Method::ode:
      return "ode";
    case Method::ssa:
      return "ssa";
    case Method::tau:
      return "tau";
    case Method::cle:
      return "cle";
  }
  return "ode";
}

Method method_from_string(const std::string& s) {
  if (s == "ode") return Method::ode;
  if (s == "ssa") return Method::ssa;
  if (s == "tau") return Method::tau;
  if (s == "cle") return Method::cle;
  throw std::invalid_argument("unknown simulation method '" + s + "'");
}

std::vector<double> time_grid(double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step dt must be positive");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) t[i] = static_cast<double>(i) * dt;
  t[steps] = t_end;
  return t;
}

namespace {

void check_dims(const Network& net, ConstVectorRef c, ConstVectorRef x0) {
  if (static_cast<std::size_t>(x0.size()) != net.num_species())
    throw std::invalid_argument("initial state has wrong dimension");
  if (static_cast<std::size_t>(c.size()) != net.num_parameters())
    throw std::invalid_argument("parameter vector has wrong dimension");
}

TimeSeries make_series(const Network& net, SeriesKind kind, std::size_t records) {
  TimeSeries ts;
  ts.species = net.species_names();
  ts.kind = kind;
  ts.times.reserve(records);
  ts.states.resize(static_cast<Eigen::Index>(records), static_cast<Eigen::Index>(net.num_species()));
  return ts;
}

// drift including the clamp counter
void drift_into(const Network& net, const Vector& x, ConstVectorRef c, Vector& a, Vector& b, EvalCounters& counters) {
  net.propensities(x, c, a, &counters);
  b.setZero();
  for (std::size_t j = 0; j < net.num_reactions(); ++j)
    for (const StoichEntry& e : net.reaction(j).change)
      b[static_cast<Eigen::Index>(e.species)] += e.count * a[static_cast<Eigen::Index>(j)];
}

std::size_t clip_negative(Vector& x) {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < 0.0) {
      x[i] = 0.0;
      ++n;
    }
  return n;
}

}  // namespace

TimeSeries simulate_ode(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, double dt) {
  return simulate_ode_on_grid(net, c, x0, time_grid(t_end, dt));
}

TimeSeries simulate_ode_on_grid(const Network& net, ConstVectorRef c, ConstVectorRef x0, const std::vector<double>& grid) {
  check_dims(net, c, x0);
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  TimeSeries ts = make_series(net, SeriesKind::ode, grid.size());
  ts.times = grid;

  const auto d = static_cast<Eigen::Index>(net.num_species());
  const auto J = static_cast<Eigen::Index>(net.num_reactions());
  Vector z = x0, a(J), k1(d), k2(d), k3(d), k4(d), tmp(d);
  EvalCounters counters;
  ts.states.row(0) = z.transpose();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    drift_into(net, z, c, a, k1, counters);
    tmp = z + 0.5 * h * k1;
    drift_into(net, tmp, c, a, k2, counters);
    tmp = z + 0.5 * h * k2;
    drift_into(net, tmp, c, a, k3, counters);
    tmp = z + h * k3;
    drift_into(net, tmp, c, a, k4, counters);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) throw SimulationError("ODE blow-up at t=" + format_number(grid[i]));
    ts.states.row(static_cast<Eigen::Index>(i)) = z.transpose();
  }
  ts.clamped = counters.clamped;
  return ts;
}

TimeSeries simulate_ssa(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, std::uint64_t seed,
                        std::size_t max_jumps) {
  check_dims(net, c, x0);
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  for (Eigen::Index i = 0; i < x0.size(); ++i)
    if (x0[i] < 0.0 || x0[i] != std::floor(x0[i]))
      throw std::invalid_argument("SSA initial state must be nonnegative integers");

  const auto d = static_cast<Eigen::Index>(net.num_species());
  const std::size_t J = net.num_reactions();
  Rng rng(seed);
  EvalCounters counters;
  Vector x = x0, a(static_cast<Eigen::Index>(J));
  std::vector<double> times{0.0};
  std::vector<double> flat(x.data(), x.data() + d);
  double t = 0.0;
  std::size_t jumps = 0;

  for (;;) {
    net.propensities(x, c, a, &counters);
    const double a0 = a.sum();
    if (!(a0 > 0.0)) break;  // absorbing
    const double tau = -std::log(rng.uniform_open0()) / a0;
    if (t + tau >= t_end || !(t + tau > t)) break;
    t += tau;
    const double target = rng.uniform_open0() * a0;
    std::size_t j = 0;
    double acc = a[0];
    while (acc < target && j + 1 < J) acc += a[static_cast<Eigen::Index>(++j)];
    // Guard against landing on a zero-rate channel via round-off at the top end.
    while (a[static_cast<Eigen::Index>(j)] == 0.0 && j > 0) --j;
    for (const StoichEntry& e : net.reaction(j).change) x[static_cast<Eigen::Index>(e.species)] += e.count;
    if (++jumps > max_jumps)
      throw SimulationError("SSA exceeded " + std::to_string(max_jumps) + " jumps before t_end");
    times.push_back(t);
    flat.insert(flat.end(), x.data(), x.data() + d);
  }
  times.push_back(t_end);
  flat.insert(flat.end(), x.data(), x.data() + d);

  TimeSeries ts;
  ts.species = net.species_names();
  ts.kind = SeriesKind::ssa;
  ts.times = std::move(times);
  ts.states = Eigen::Map<StateMatrix>(flat.data(), static_cast<Eigen::Index>(ts.times.size()), d);
  ts.seed = seed;
  ts.rng = kRngName;
  ts.clamped = counters.clamped;
  return ts;
}

TimeSeries simulate_tau_leap(const Network& net, ConstVectorRef c, ConstVectorRef x0, double dt, double t_end,
                             std::uint64_t seed) {
  check_dims(net, c, x0);
  const std::vector<double> grid = time_grid(t_end, dt);
  TimeSeries ts = make_series(net, SeriesKind::tau, grid.size());
  ts.times = grid;
  ts.seed = seed;
  ts.rng = kRngName;

  Rng rng(seed);
  EvalCounters counters;
  const std::size_t J = net.num_reactions();
  Vector x = x0, a(static_cast<Eigen::Index>(J));
  ts.states.row(0) = x.transpose();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    net.propensities(x, c, a, &counters);
    for (std::size_t j = 0; j < J; ++j) {
      const double mean = a[static_cast<Eigen::Index>(j)] * h;
      if (mean <= 0.0) continue;
      const double fired = static_cast<double>(rng.poisson(mean));
      if (fired == 0.0) continue;
      for (const StoichEntry& e : net.reaction(j).change) x[static_cast<Eigen::Index>(e.species)] += e.count * fired;
    }
    ts.clipped += clip_negative(x);
    ts.states.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  ts.clamped = counters.clamped;
  return ts;
}

TimeSeries simulate_cle(const Network& net, ConstVectorRef c, ConstVectorRef x0, double dt, double t_end,
                        std::uint64_t seed, double noise_scale) {
  check_dims(net, c, x0);
  const std::vector<double> grid = time_grid(t_end, dt);
  TimeSeries ts = make_series(net, SeriesKind::cle, grid.size());
  ts.times = grid;
  ts.seed = seed;
  ts.rng = kRngName;

  Rng rng(seed);
  EvalCounters counters;
  const auto d = static_cast<Eigen::Index>(net.num_species());
  const std::size_t J = net.num_reactions();
  Vector x = x0, a(static_cast<Eigen::Index>(J)), b(d);
  ts.states.row(0) = x.transpose();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    drift_into(net, x, c, a, b, counters);
    Vector next = x + h * b;
    const double sqrt_h = std::sqrt(h);
    for (std::size_t j = 0; j < J; ++j) {
      const double w = rng.normal() * sqrt_h;  // drawn for every channel to keep streams aligned
      const double amp = noise_scale * std::sqrt(a[static_cast<Eigen::Index>(j)]) * w;
      if (amp == 0.0) continue;
      for (const StoichEntry& e : net.reaction(j).change) next[static_cast<Eigen::Index>(e.species)] += e.count * amp;
    }
    ts.clipped += clip_negative(next);
    if (!next.allFinite()) throw SimulationError("CLE blow-up at t=" + format_number(grid[i]));
    x = next;
    ts.states.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  ts.clamped = counters.clamped;
  return ts;
}

TimeSeries simulate(const Network& net, const SimulationSpec& spec, std::uint64_t seed) {
  const Vector& c = net.parameter_values();
  const Vector& x0 = net.initial_state();
  switch (spec.method) {
    case Method::ode:
      return simulate_ode(net, c, x0, spec.t_end, spec.dt);
    case Method::ssa:
      return simulate_ssa(net, c, x0, spec.t_end, seed);
    case Method::tau:
      return simulate_tau_leap(net, c, x0, spec.dt, spec.t_end, seed);
    case Method::cle:
      return simulate_cle(net, c, x0, spec.dt, spec.t_end, seed);
  }
  throw std::invalid_argument("unknown method");
}

Ensemble simulate_ensemble(const Network& net, const SimulationSpec& spec, std::size_t members,
                           std::uint64_t base_seed, unsigned threads) {
  if (members < 1) throw std::invalid_argument("ensemble needs at least one member");
  Ensemble ens;
  ens.members.resize(members);
  ens.seeds.resize(members);
  for (std::size_t m = 0; m < members; ++m) ens.seeds[m] = base_seed + m;

  std::vector<std::exception_ptr> errors(members);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t m = next++; m < members; m = next++) {
      try {
        ens.members[m] = simulate(net, spec, ens.seeds[m]);
      } catch (...) {
        errors[m] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(members)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t m = 0; m < members; ++m) {
    if (!errors[m]) continue;
    try {
      std::rethrow_exception(errors[m]);
    } catch (const std::exception& e) {
      throw SimulationError("ensemble member " + std::to_string(m) + ": " + e.what());
    }
  }
  return ens;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_ensemble(const std::string& dir, const Ensemble& ens, const Network& net, const SimulationSpec& spec,
                    std::uint64_t base_seed, double kurtz_n) {
  std::filesystem::create_directories(dir);
  Json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["method"] = to_string(spec.method);
  manifest["rng"] = kRngName;
  manifest["seed_rule"] = "member m uses base_seed + m";
  manifest["base_seed"] = base_seed;
  manifest["t_end"] = spec.t_end;
  if (spec.method != Method::ssa) manifest["dt"] = spec.dt;
  if (kurtz_n > 0.0) manifest["kurtz_N"] = kurtz_n;
  manifest["model_hash"] = fnv1a_hex(serialize_model(net));
  manifest["species"] = net.species_names();
  Json members = Json::array();
  for (std::size_t m = 0; m < ens.members.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%04zu.csv", m);
    write_csv((std::filesystem::path(dir) / name).string(), ens.members[m]);
    members.push_back({{"file", name},
                       {"seed", ens.seeds[m]},
                       {"clipped", ens.members[m].clipped},
                       {"clamped", ens.members[m].clamped}});
  }
  manifest["members"] = members;
  write_text_file((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

Ensemble load_ensemble(const std::string& manifest_path) {
  Json doc;
  try {
    doc = Json::parse(read_text_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("'" + manifest_path + "': " + e.what());
  }
  const auto dir = std::filesystem::path(manifest_path).parent_path();
  Ensemble ens;
  try {
    const SeriesKind kind = series_kind_from_string(doc.at("method").get<std::string>());
    for (const Json& m : doc.at("members")) {
      TimeSeries ts = read_csv((dir / m.at("file").get<std::string>()).string(), kind);
      ts.seed = m.at("seed").get<std::uint64_t>();
      ts.rng = doc.value("rng", std::string{});
      ens.seeds.push_back(ts.seed);
      ens.members.push_back(std::move(ts));
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument("'" + manifest_path + "': malformed manifest: " + e.what());
  }
  if (ens.members.empty()) throw std::invalid_argument("'" + manifest_path + "': manifest lists no members");
  return ens;
}

Network kurtz_scale(const Network& net, double system_size) {
  if (!(system_size > 0.0)) throw std::invalid_argument("system size must be positive");
  const Expr n = Expr::constant(system_size);
  std::vector<Reaction> scaled;
  for (const Reaction& r : net.reactions()) {
    Expr rate = n * r.rate.map_species([&](std::size_t i) { return Expr::species(i) / n; });
    scaled.push_back(make_reaction(r.name, r.reactants, r.products, std::move(rate)));
  }
  Vector x0 = (system_size * net.initial_state()).array().round().matrix();
  return Network(net.species_names(), x0, net.parameter_names(), net.parameter_values(), std::move(scaled), "count");
}

}  // namespace netreduce
