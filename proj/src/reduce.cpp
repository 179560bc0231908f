#include "netreduce/reduce.hpp"

#include <algorithm>
#include <stdexcept>

namespace netreduce {

namespace {

bool contains(const IndexSet& s, std::size_t v) { return std::binary_search(s.begin(), s.end(), v); }

IndexSet sorted_unique(IndexSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// position of each member of s in s, or npos
std::vector<std::size_t> positions(const IndexSet& s, std::size_t n) {
  std::vector<std::size_t> pos(n, static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < s.size(); ++r) pos[s[r]] = r;
  return pos;
}

Vector gather(ConstVectorRef v, const IndexSet& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(idx[r])];
  return out;
}

void check_indices(const IndexSet& s, std::size_t n, const char* what) {
  for (std::size_t v : s)
    if (v >= n) throw std::out_of_range(std::string(what) + " index " + std::to_string(v) + " out of range");
}

}  // namespace

Vector ReductionMaps::project_state(ConstVectorRef x) const { return gather(x, pi); }
Vector ReductionMaps::project_parameters(ConstVectorRef c) const { return gather(c, gamma); }

IndexSet select_reactions(const Network& net, const IndexSet& P) {
  if (P.empty()) throw std::invalid_argument("empty sensitive parameter set");
  check_indices(P, net.num_parameters(), "parameter");
  IndexSet J;
  for (std::size_t k : P) J.insert(J.end(), net.phi()[k].begin(), net.phi()[k].end());
  J = sorted_unique(std::move(J));
  if (J.empty()) throw std::invalid_argument("selected parameters are not referenced by any reaction");
  return J;
}

IndexSet select_species(const Network& net, const IndexSet& J_P) {
  if (J_P.empty()) throw std::invalid_argument("empty reaction set");
  check_indices(J_P, net.num_reactions(), "reaction");
  IndexSet S;
  for (std::size_t j : J_P) {
    for (const StoichEntry& e : net.reaction(j).reactants) S.push_back(e.species);
    for (const StoichEntry& e : net.reaction(j).products) S.push_back(e.species);
  }
  return sorted_unique(std::move(S));
}

ReductionMaps build_maps(const Network& net, const IndexSet& P, const IndexSet& J_P, const IndexSet& S_P,
                         const TimeSeries& ts) {
  if (ts.num_species() != net.num_species())
    throw std::invalid_argument("time series has " + std::to_string(ts.num_species()) + " species, network has " +
                                std::to_string(net.num_species()));
  return build_maps(net, P, J_P, S_P, time_average(ts), to_string(ts.kind) + " series");
}

ReductionMaps build_maps(const Network& net, const IndexSet& P, const IndexSet& J_P, const IndexSet& S_P,
                         const Vector& full_time_average, std::string data_source) {
  const std::size_t K = net.num_parameters(), d = net.num_species();
  if (static_cast<std::size_t>(full_time_average.size()) != d)
    throw std::invalid_argument("time average has wrong dimension");
  check_indices(P, K, "parameter");
  check_indices(J_P, net.num_reactions(), "reaction");
  check_indices(S_P, d, "species");

  ReductionMaps m;
  m.P = sorted_unique(P);
  m.J_P = sorted_unique(J_P);
  m.S_P = sorted_unique(S_P);
  m.gamma = m.P;
  m.pi = m.S_P;

  IndexSet frozen_params, frozen_species;
  for (std::size_t j : m.J_P) {
    for (std::size_t k : net.reaction(j).rate.parameter_refs())
      if (!contains(m.P, k)) frozen_params.push_back(k);
    for (std::size_t i : net.reaction(j).rate.species_refs())
      if (!contains(m.S_P, i)) frozen_species.push_back(i);
  }
  m.gamma_comp1 = sorted_unique(std::move(frozen_params));
  m.pi_comp1 = sorted_unique(std::move(frozen_species));
  for (std::size_t k = 0; k < K; ++k)
    if (!contains(m.gamma, k) && !contains(m.gamma_comp1, k)) m.gamma_comp2.push_back(k);
  for (std::size_t i = 0; i < d; ++i)
    if (!contains(m.pi, i) && !contains(m.pi_comp1, i)) m.pi_comp2.push_back(i);

  m.u = gather(net.parameter_values(), m.gamma_comp1);
  m.y_bar = gather(full_time_average, m.pi_comp1);
  m.full_time_average = full_time_average;
  m.data_source = std::move(data_source);
  return m;
}

ReducedModel build_reduced_model(const Network& net, const ReductionMaps& maps) {
  const std::size_t K = net.num_parameters(), d = net.num_species();
  const auto ppos = positions(maps.gamma, K), fpos = positions(maps.gamma_comp1, K);
  const auto spos = positions(maps.pi, d), ypos = positions(maps.pi_comp1, d);
  const auto npos = static_cast<std::size_t>(-1);

  auto param_map = [&](std::size_t k) -> Expr::LeafMap {
    if (ppos[k] != npos) return {ppos[k], std::nullopt};
    if (fpos[k] != npos) return {std::nullopt, maps.u[static_cast<Eigen::Index>(fpos[k])]};
    throw std::logic_error("selected reaction references dropped parameter " + net.parameter_names()[k]);
  };
  auto species_map = [&](std::size_t i) -> Expr::LeafMap {
    if (spos[i] != npos) return {spos[i], std::nullopt};
    if (ypos[i] != npos) return {std::nullopt, maps.y_bar[static_cast<Eigen::Index>(ypos[i])]};
    throw std::logic_error("selected reaction references dropped species " + net.species_names()[i]);
  };
  auto relabel = [&](const StoichColumn& col) {
    StoichColumn out;
    for (const StoichEntry& e : col) {
      if (spos[e.species] == npos)
        throw std::logic_error("selected reaction changes dropped species " + net.species_names()[e.species]);
      out.push_back({spos[e.species], e.count});
    }
    return out;
  };

  std::vector<Reaction> reactions;
  for (std::size_t j : maps.J_P) {
    const Reaction& r = net.reaction(j);
    std::optional<std::size_t> ma;
    if (r.mass_action_param && ppos[*r.mass_action_param] != npos) ma = ppos[*r.mass_action_param];
    reactions.push_back(make_reaction(r.name, relabel(r.reactants), relabel(r.products),
                                      r.rate.substitute(param_map, species_map), ma));
  }
  std::vector<std::string> species, params;
  for (std::size_t i : maps.pi) species.push_back(net.species_names()[i]);
  for (std::size_t k : maps.gamma) params.push_back(net.parameter_names()[k]);

  ReducedModel out;
  out.maps = maps;
  out.network = Network(std::move(species), maps.project_state(net.initial_state()), std::move(params),
                        maps.project_parameters(net.parameter_values()), std::move(reactions), net.units());
  return out;
}

ReducedModel reduce(const Network& net, const IndexSet& P, const TimeSeries& ts) {
  const IndexSet J = select_reactions(net, P);
  const IndexSet S = select_species(net, J);
  return build_reduced_model(net, build_maps(net, P, J, S, ts));
}

ReductionMaps augment_with_species(const Network& net, const ReductionMaps& maps, std::size_t species) {
  if (species >= net.num_species()) throw std::out_of_range("species index out of range");
  if (!contains(maps.S_P, species))
    throw std::invalid_argument("species " + net.species_names()[species] + " is not resolved by the reduced model");
  IndexSet J = maps.J_P;
  for (std::size_t j = 0; j < net.num_reactions(); ++j) {
    const Reaction& r = net.reaction(j);
    auto takes_part = [&](const StoichColumn& col) {
      return std::any_of(col.begin(), col.end(), [&](const StoichEntry& e) { return e.species == species; });
    };
    if (takes_part(r.reactants) || takes_part(r.products)) J.push_back(j);
  }
  J = sorted_unique(std::move(J));
  const IndexSet S = select_species(net, J);
  return build_maps(net, maps.P, J, S, maps.full_time_average, maps.data_source);
}

Json maps_to_json(const Network& full, const ReductionMaps& m) {
  auto names = [](const IndexSet& idx, const std::vector<std::string>& all) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(all[i]);
    return out;
  };
  Json doc;
  doc["P"] = m.P;
  doc["J_P"] = m.J_P;
  doc["S_P"] = m.S_P;
  doc["gamma"] = m.gamma;
  doc["gamma_comp1"] = m.gamma_comp1;
  doc["gamma_comp2"] = m.gamma_comp2;
  doc["pi"] = m.pi;
  doc["pi_comp1"] = m.pi_comp1;
  doc["pi_comp2"] = m.pi_comp2;
  doc["parameters"] = names(m.P, full.parameter_names());
  doc["species"] = names(m.S_P, full.species_names());
  Json frozen_p = Json::array();
  for (std::size_t r = 0; r < m.gamma_comp1.size(); ++r)
    frozen_p.push_back({{"name", full.parameter_names()[m.gamma_comp1[r]]}, {"value", m.u[static_cast<Eigen::Index>(r)]}});
  Json frozen_s = Json::array();
  for (std::size_t r = 0; r < m.pi_comp1.size(); ++r)
    frozen_s.push_back({{"name", full.species_names()[m.pi_comp1[r]]}, {"value", m.y_bar[static_cast<Eigen::Index>(r)]}});
  doc["frozen_parameters"] = frozen_p;
  doc["frozen_species"] = frozen_s;
  doc["u"] = to_std(m.u);
  doc["y_bar"] = to_std(m.y_bar);
  doc["full_time_average"] = to_std(m.full_time_average);
  doc["data_source"] = m.data_source;
  return doc;
}

ReductionMaps maps_from_json(const Json& doc) {
  ReductionMaps m;
  try {
    m.P = doc.at("P").get<IndexSet>();
    m.J_P = doc.at("J_P").get<IndexSet>();
    m.S_P = doc.at("S_P").get<IndexSet>();
    m.gamma = doc.at("gamma").get<IndexSet>();
    m.gamma_comp1 = doc.at("gamma_comp1").get<IndexSet>();
    m.gamma_comp2 = doc.at("gamma_comp2").get<IndexSet>();
    m.pi = doc.at("pi").get<IndexSet>();
    m.pi_comp1 = doc.at("pi_comp1").get<IndexSet>();
    m.pi_comp2 = doc.at("pi_comp2").get<IndexSet>();
    m.u = to_eigen(doc.at("u").get<std::vector<double>>());
    m.y_bar = to_eigen(doc.at("y_bar").get<std::vector<double>>());
    m.full_time_average = to_eigen(doc.at("full_time_average").get<std::vector<double>>());
    m.data_source = doc.value("data_source", std::string{});
  } catch (const Json::exception& e) {
    throw ModelError(std::string("schema violation: reduction maps: ") + e.what());
  }
  if (m.u.size() != static_cast<Eigen::Index>(m.gamma_comp1.size()) ||
      m.y_bar.size() != static_cast<Eigen::Index>(m.pi_comp1.size()))
    throw ModelError("schema violation: frozen value counts do not match the maps");
  return m;
}

Json reduced_to_json(const Network& full, const ReducedModel& model) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "reduced";
  doc["sizes"] = {{"species", model.maps.num_species()},
                  {"reactions", model.maps.num_reactions()},
                  {"parameters", model.maps.num_parameters()}};
  doc["maps"] = maps_to_json(full, model.maps);
  doc["theta0"] = to_std(model.theta0());
  const Eigen::MatrixXi nu = model.network.stoichiometry();
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < nu.rows(); ++i) {
    std::vector<int> row;
    for (Eigen::Index j = 0; j < nu.cols(); ++j) row.push_back(nu(i, j));
    rows.push_back(row);
  }
  doc["stoichiometry"] = rows;
  doc["network"] = model_to_json(model.network);
  return doc;
}

ReducedModel reduced_from_json(const Json& doc) {
  if (!doc.contains("maps") || !doc.contains("network"))
    throw ModelError("schema violation: reduced model needs 'maps' and 'network'");
  ReducedModel m;
  m.maps = maps_from_json(doc.at("maps"));
  m.network = model_from_json(doc.at("network"));
  if (m.network.num_species() != m.maps.S_P.size() || m.network.num_reactions() != m.maps.J_P.size() ||
      m.network.num_parameters() != m.maps.P.size())
    throw ModelError("schema violation: reduced network does not match its maps");
  return m;
}

ReducedModel load_reduced(const std::string& path) {
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ModelError("'" + path + "': " + e.what());
  }
  return reduced_from_json(doc);
}

}  // namespace netreduce
