#include "netreduce/fim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "netreduce/simulate.hpp"

namespace netreduce {

void InformationRanking::finalize() {
  const auto K = static_cast<std::size_t>(xi.size());
  order.resize(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xi[static_cast<Eigen::Index>(a)] > xi[static_cast<Eigen::Index>(b)]; });
  cumulative.assign(K, 0.0);
  const double total = trace();
  if (!(total > 0.0)) return;
  double acc = 0.0;
  for (std::size_t n = 0; n < K; ++n) {
    acc += xi[static_cast<Eigen::Index>(order[n])];
    cumulative[n] = std::min(1.0, acc / total);
  }
  if (K > 0) cumulative[K - 1] = 1.0;
}

Matrix FimBlocks::dense() const {
  const auto K = static_cast<Eigen::Index>(num_parameters);
  Matrix m = Matrix::Zero(K, K);
  for (const FimBlock& b : blocks)
    for (std::size_t r = 0; r < b.params.size(); ++r)
      for (std::size_t s = 0; s < b.params.size(); ++s)
        m(static_cast<Eigen::Index>(b.params[r]), static_cast<Eigen::Index>(b.params[s])) =
            b.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
  return m;
}

Vector FimBlocks::diagonal() const {
  Vector d = Vector::Zero(static_cast<Eigen::Index>(num_parameters));
  for (const FimBlock& b : blocks)
    for (std::size_t r = 0; r < b.params.size(); ++r)
      d[static_cast<Eigen::Index>(b.params[r])] = b.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  return d;
}

std::vector<std::vector<std::size_t>> parameter_blocks(const Network& net) {
  const std::size_t K = net.num_parameters();
  std::vector<std::size_t> parent(K);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  for (const Reaction& r : net.reactions()) {
    const auto& refs = r.rate.parameter_refs();
    for (std::size_t n = 1; n < refs.size(); ++n) {
      const std::size_t a = find(refs[0]), b = find(refs[n]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(K, K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t root = find(k);
    if (slot[root] == K) {
      slot[root] = groups.size();
      groups.emplace_back();
    }
    groups[slot[root]].push_back(k);
  }
  return groups;
}

namespace {

void check_series(const Network& net, ConstVectorRef c, const TimeSeries& ts) {
  if (ts.num_species() != net.num_species())
    throw std::invalid_argument("time series has " + std::to_string(ts.num_species()) + " species, network has " +
                                std::to_string(net.num_species()));
  if (static_cast<std::size_t>(c.size()) != net.num_parameters())
    throw std::invalid_argument("parameter vector has wrong dimension");
}

// Calls f(k, l, w) for every pair of parameters of every reaction at every sample,
// where w = (da/dc_k)(da/dc_l)/a * dt in natural scale.
template <typename F>
void accumulate(const Network& net, ConstVectorRef c, const TimeSeries& ts, bool diagonal_only, F&& f) {
  SparseGradient g;
  for (std::size_t i = 1; i < ts.num_records(); ++i) {
    const double h = ts.dt(i);
    const Vector x = ts.state(i - 1);
    for (std::size_t j = 0; j < net.num_reactions(); ++j) {
      const double a = net.propensity_gradient(j, x, c, g);
      if (a == 0.0) {
        for (std::size_t n = 0; n < g.index.size(); ++n)
          if (g.value[n] != 0.0)
            throw FimError("zero propensity with nonzero parameter derivative at sample " + std::to_string(i - 1) +
                           ", reaction " + std::to_string(j) + ", parameter " + std::to_string(g.index[n]));
        continue;
      }
      for (std::size_t r = 0; r < g.index.size(); ++r) {
        if (diagonal_only) {
          f(g.index[r], g.index[r], g.value[r] * g.value[r] / a * h);
          continue;
        }
        for (std::size_t s = 0; s < g.index.size(); ++s) f(g.index[r], g.index[s], g.value[r] * g.value[s] / a * h);
      }
    }
  }
}

Vector diag_raw(const Network& net, ConstVectorRef c, const TimeSeries& ts, bool log_scale) {
  check_series(net, c, ts);
  Vector xi = Vector::Zero(static_cast<Eigen::Index>(net.num_parameters()));
  accumulate(net, c, ts, true, [&](std::size_t k, std::size_t, double w) { xi[static_cast<Eigen::Index>(k)] += w; });
  if (log_scale) xi.array() *= c.array().square();
  return xi;
}

}  // namespace

InformationRanking fim_diag_mean_field(const Network& net, ConstVectorRef c, const TimeSeries& ts, bool log_scale) {
  InformationRanking r;
  r.xi = diag_raw(net, c, ts, log_scale);
  r.log_scale = log_scale;
  r.finalize();
  return r;
}

FimBlocks fim_blocks_mean_field(const Network& net, ConstVectorRef c, const TimeSeries& ts, bool log_scale) {
  check_series(net, c, ts);
  FimBlocks out;
  out.num_parameters = net.num_parameters();
  out.log_scale = log_scale;
  std::vector<std::size_t> block_of(net.num_parameters()), pos(net.num_parameters());
  for (auto& group : parameter_blocks(net)) {
    for (std::size_t n = 0; n < group.size(); ++n) {
      block_of[group[n]] = out.blocks.size();
      pos[group[n]] = n;
    }
    const auto n = static_cast<Eigen::Index>(group.size());
    out.blocks.push_back({std::move(group), Matrix::Zero(n, n)});
  }
  accumulate(net, c, ts, false, [&](std::size_t k, std::size_t l, double w) {
    out.blocks[block_of[k]].matrix(static_cast<Eigen::Index>(pos[k]), static_cast<Eigen::Index>(pos[l])) += w;
  });
  if (log_scale)
    for (FimBlock& b : out.blocks)
      for (std::size_t r = 0; r < b.params.size(); ++r)
        for (std::size_t s = 0; s < b.params.size(); ++s)
          b.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) *=
              c[static_cast<Eigen::Index>(b.params[r])] * c[static_cast<Eigen::Index>(b.params[s])];
  return out;
}

InformationRanking fim_diag_stochastic(const Network& net, ConstVectorRef c, const Ensemble& ens, bool log_scale) {
  if (ens.members.empty()) throw std::invalid_argument("empty ensemble");
  const auto K = static_cast<Eigen::Index>(net.num_parameters());
  const std::size_t M = ens.members.size();
  std::vector<Vector> per(M);
  for (std::size_t m = 0; m < M; ++m) {
    if (ens.members[m].kind != SeriesKind::ssa)
      throw std::invalid_argument("stochastic estimator needs SSA trajectories (member " + std::to_string(m) + ")");
    per[m] = diag_raw(net, c, ens.members[m], log_scale);
  }
  // Shifted sums keep identical members at exactly zero spread.
  Vector shift_sum = Vector::Zero(K), shift_sq = Vector::Zero(K);
  for (std::size_t m = 0; m < M; ++m) {
    const Vector dev = per[m] - per[0];
    shift_sum += dev;
    shift_sq += dev.cwiseProduct(dev);
  }
  const double Md = static_cast<double>(M);
  InformationRanking r;
  r.xi = per[0] + shift_sum / Md;
  r.std_error = Vector::Zero(K);
  if (M > 1) {
    const Vector var = ((shift_sq - shift_sum.cwiseProduct(shift_sum) / Md) / (Md - 1.0)).cwiseMax(0.0);
    r.std_error = (var / Md).cwiseSqrt();
  }
  r.log_scale = log_scale;
  r.members = M;
  r.finalize();
  return r;
}

std::vector<std::size_t> rank_and_select(const InformationRanking& ranking, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
  if (!(ranking.trace() > 0.0)) throw std::invalid_argument("no information in data");
  InformationRanking r = ranking;
  if (r.order.size() != static_cast<std::size_t>(r.xi.size()) || r.cumulative.size() != r.order.size()) r.finalize();
  std::size_t count = r.order.size();
  if (kappa < 1.0) {
    for (std::size_t n = 0; n < r.order.size(); ++n)
      if (r.cumulative[n] >= kappa - 1e-12) {
        count = n + 1;
        break;
      }
  }
  std::vector<std::size_t> P(r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(P.begin(), P.end());
  return P;
}

Vector reaction_information_share(const Network& net, const InformationRanking& ranking) {
  const auto J = static_cast<Eigen::Index>(net.num_reactions());
  Vector share = Vector::Zero(J);
  for (Eigen::Index j = 0; j < J; ++j)
    for (std::size_t k : net.reaction(static_cast<std::size_t>(j)).rate.parameter_refs())
      share[j] += ranking.xi[static_cast<Eigen::Index>(k)];
  const double total = share.sum();
  if (!(total > 0.0)) throw std::invalid_argument("reaction information share: zero total information");
  return share / total;
}

AdjointResult adjoint_sensitivities(const Network& net, ConstVectorRef c, ConstVectorRef x0, double t_end, double dt) {
  const auto d = static_cast<Eigen::Index>(net.num_species());
  const auto K = static_cast<Eigen::Index>(net.num_parameters());
  if (x0.size() != d || c.size() != K) throw std::invalid_argument("adjoint: dimension mismatch");
  const std::vector<double> grid = time_grid(t_end, dt);

  SparseGradient gc;
  std::vector<double> gx;
  auto rhs = [&](const Vector& z, const Matrix& S, Vector& dz, Matrix& dS) {
    dz.setZero(d);
    Matrix Jz = Matrix::Zero(d, d);
    dS.setZero(d, K);
    for (std::size_t j = 0; j < net.num_reactions(); ++j) {
      const Reaction& r = net.reaction(j);
      const double a = net.propensity_gradient(j, z, c, gc);
      net.propensity_state_gradient(j, z, c, gx);
      const auto& srefs = r.rate.species_refs();
      for (const StoichEntry& e : r.change) {
        const auto i = static_cast<Eigen::Index>(e.species);
        dz[i] += e.count * a;
        for (std::size_t n = 0; n < gc.index.size(); ++n) dS(i, static_cast<Eigen::Index>(gc.index[n])) += e.count * gc.value[n];
        for (std::size_t n = 0; n < srefs.size(); ++n) Jz(i, static_cast<Eigen::Index>(srefs[n])) += e.count * gx[n];
      }
    }
    dS.noalias() += Jz * S;
  };

  Vector z = x0, k1, k2, k3, k4;
  Matrix S = Matrix::Zero(d, K), L1, L2, L3, L4;
  Vector z_acc = Vector::Zero(d);
  Matrix S_acc = Matrix::Zero(d, K);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1];
    const Vector z_prev = z;
    const Matrix S_prev = S;
    rhs(z, S, k1, L1);
    rhs(z + 0.5 * h * k1, S + 0.5 * h * L1, k2, L2);
    rhs(z + 0.5 * h * k2, S + 0.5 * h * L2, k3, L3);
    rhs(z + h * k3, S + h * L3, k4, L4);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    S += (h / 6.0) * (L1 + 2.0 * L2 + 2.0 * L3 + L4);
    if (!z.allFinite() || !S.allFinite()) throw SimulationError("sensitivity blow-up at t=" + format_number(grid[i]));
    z_acc += 0.5 * h * (z_prev + z);
    S_acc += 0.5 * h * (S_prev + S);
  }
  const double T = grid.back() - grid.front();
  AdjointResult out;
  out.time_average = z_acc / T;
  out.sensitivity = (S_acc / T) * c.asDiagonal();
  return out;
}

SensitivityBoundReport sensitivity_bound_check(const Network& net, const Ensemble& ssa, std::size_t species,
                                               double ode_dt) {
  if (ssa.members.size() < 2) throw std::invalid_argument("sensitivity bound needs at least two trajectories");
  if (species >= net.num_species()) throw std::out_of_range("species index out of range");
  const std::size_t M = ssa.members.size();
  const double Md = static_cast<double>(M);
  std::vector<double> f(M);
  for (std::size_t m = 0; m < M; ++m) f[m] = time_average(ssa.members[m])[static_cast<Eigen::Index>(species)];
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= Md;
  double ss = 0.0;
  for (double v : f) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (Md - 1.0));
  if (!(sd > 0.0)) throw std::invalid_argument("sensitivity bound: observable has zero sample variance");
  const double rel_se_sd = 1.0 / std::sqrt(2.0 * (Md - 1.0));

  const Vector& c = net.parameter_values();
  const InformationRanking xi = fim_diag_stochastic(net, c, ssa, true);
  const AdjointResult adj = adjoint_sensitivities(net, c, net.initial_state(), ssa.members.front().duration(), ode_dt);

  SensitivityBoundReport rep;
  rep.species = species;
  rep.mean_f = mean;
  rep.sd_f = sd;
  for (std::size_t k = 0; k < net.num_parameters(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    SensitivityBoundEntry e;
    e.parameter = k;
    e.index = std::abs(adj.sensitivity(static_cast<Eigen::Index>(species), kk)) / sd;
    const double root = std::sqrt(xi.xi[kk]);
    const double se_root = root > 0.0 ? xi.std_error[kk] / (2.0 * root) : std::sqrt(xi.std_error[kk]);
    const double se_index = e.index * rel_se_sd;
    e.bound = root + 3.0 * std::hypot(se_root, se_index);
    e.holds = e.index <= e.bound;
    rep.entries.push_back(e);
  }
  return rep;
}

Json fim_to_json(const InformationRanking& ranking, const FimBlocks* blocks, const std::vector<std::string>& names) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["scale"] = ranking.log_scale ? "log" : "natural";
  doc["parameters"] = names;
  doc["xi"] = std::vector<double>(ranking.xi.data(), ranking.xi.data() + ranking.xi.size());
  doc["order"] = ranking.order;
  doc["cumulative"] = ranking.cumulative;
  Json jb = Json::array();
  if (blocks) {
    for (const FimBlock& b : blocks->blocks) {
      Json m = Json::array();
      for (Eigen::Index r = 0; r < b.matrix.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index s = 0; s < b.matrix.cols(); ++s) row.push_back(b.matrix(r, s));
        m.push_back(row);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix, Eigen::EigenvaluesOnly);
      const Vector ev = es.eigenvalues();
      jb.push_back({{"params", b.params}, {"matrix", m}, {"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())}});
    }
  }
  doc["blocks"] = jb;
  if (ranking.std_error.size() > 0) {
    doc["stderr"] = std::vector<double>(ranking.std_error.data(), ranking.std_error.data() + ranking.std_error.size());
    doc["members"] = ranking.members;
  }
  return doc;
}

}  // namespace netreduce
