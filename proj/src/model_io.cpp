#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"

namespace netreduce {

namespace {

const Json& require(const Json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ModelError(std::string("schema violation: missing '") + key + "' in " + where);
  return obj.at(key);
}

int multiplicity(const Json& v, const std::string& species) {
  if (!v.is_number()) throw ModelError("schema violation: multiplicity of '" + species + "' must be a number");
  const double m = v.get<double>();
  if (m < 0) throw ModelError("negative stoichiometry for species '" + species + "'");
  if (m != static_cast<int>(m)) throw ModelError("schema violation: non-integer multiplicity for '" + species + "'");
  return static_cast<int>(m);
}

StoichColumn read_column(const Json& obj, const std::vector<std::string>& species, const char* where) {
  if (!obj.is_object()) throw ModelError(std::string("schema violation: '") + where + "' must be an object");
  StoichColumn col;
  for (const auto& [name, mult] : obj.items()) {
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) throw ModelError("unknown species '" + name + "'");
    col.push_back({static_cast<std::size_t>(it - species.begin()), multiplicity(mult, name)});
  }
  return col;
}

Json write_column(const StoichColumn& col, const std::vector<std::string>& species) {
  Json obj = Json::object();
  for (const StoichEntry& e : col) obj[species[e.species]] = e.count;
  return obj;
}

}  // namespace

Network model_from_json(const Json& doc_in) {
  const Json& doc = doc_in.contains("network") ? doc_in.at("network") : doc_in;
  if (!doc.is_object()) throw ModelError("schema violation: model must be a JSON object");

  std::vector<std::string> species;
  std::vector<double> x0;
  for (const Json& s : require(doc, "species", "model")) {
    species.push_back(require(s, "name", "species entry").get<std::string>());
    const Json& init = require(s, "initial", "species entry");
    if (!init.is_number()) throw ModelError("schema violation: species initial value must be a number");
    x0.push_back(init.get<double>());
  }
  std::vector<std::string> params;
  std::vector<double> values;
  for (const Json& p : require(doc, "parameters", "model")) {
    params.push_back(require(p, "name", "parameter entry").get<std::string>());
    const Json& v = require(p, "value", "parameter entry");
    if (!v.is_number()) throw ModelError("schema violation: parameter value must be a number");
    values.push_back(v.get<double>());
  }

  auto find_param = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(params.begin(), params.end(), name);
    if (it == params.end()) return std::nullopt;
    return static_cast<std::size_t>(it - params.begin());
  };
  auto find_species = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) return std::nullopt;
    return static_cast<std::size_t>(it - species.begin());
  };

  std::vector<Reaction> reactions;
  const Json& rxns = require(doc, "reactions", "model");
  if (!rxns.is_array()) throw ModelError("schema violation: 'reactions' must be an array");
  for (std::size_t j = 0; j < rxns.size(); ++j) {
    const Json& r = rxns[j];
    const std::string name = r.contains("name") ? r.at("name").get<std::string>() : "R" + std::to_string(j);
    StoichColumn reactants =
        r.contains("reactants") ? read_column(r.at("reactants"), species, "reactants") : StoichColumn{};
    StoichColumn products = r.contains("products") ? read_column(r.at("products"), species, "products") : StoichColumn{};
    const Json& rate = require(r, "rate", "reaction");
    if (rate.contains("mass_action") == rate.contains("expr"))
      throw ModelError("schema violation: rate of reaction '" + name + "' needs exactly one of 'mass_action', 'expr'");
    if (rate.contains("mass_action")) {
      const std::string pname = rate.at("mass_action").get<std::string>();
      auto k = find_param(pname);
      if (!k) throw ModelError("unknown parameter '" + pname + "' in reaction '" + name + "'");
      // Validate multiplicities before the shorthand consumes them.
      Reaction tmp = make_reaction(name, reactants, products, Expr::constant(0.0));
      reactions.push_back(make_reaction(name, reactants, products, mass_action_expr(*k, tmp.reactants), *k));
    } else {
      const std::string text = rate.at("expr").get<std::string>();
      Expr e;
      try {
        e = Expr::parse(text, [&](std::string_view id) -> Expr {
          if (auto k = find_param(std::string(id))) return Expr::parameter(*k);
          if (auto i = find_species(id)) return Expr::species(*i);
          throw ModelError("unknown parameter or species '" + std::string(id) + "' in reaction '" + name + "'");
        });
      } catch (const ExprSyntaxError& err) {
        throw ModelError("schema violation: reaction '" + name + "': " + err.what());
      }
      reactions.push_back(make_reaction(name, std::move(reactants), std::move(products), std::move(e)));
    }
  }

  const std::string units = doc.contains("units") ? doc.at("units").get<std::string>() : "concentration";
  return Network(std::move(species), Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(x0.size())),
                 std::move(params), Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())),
                 std::move(reactions), units);
}

Json model_to_json(const Network& net) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["units"] = net.units();
  Json species = Json::array();
  for (std::size_t i = 0; i < net.num_species(); ++i)
    species.push_back({{"name", net.species_names()[i]}, {"initial", net.initial_state()[static_cast<Eigen::Index>(i)]}});
  doc["species"] = std::move(species);
  Json params = Json::array();
  for (std::size_t k = 0; k < net.num_parameters(); ++k)
    params.push_back(
        {{"name", net.parameter_names()[k]}, {"value", net.parameter_values()[static_cast<Eigen::Index>(k)]}});
  doc["parameters"] = std::move(params);
  Json rxns = Json::array();
  for (const Reaction& r : net.reactions()) {
    Json jr;
    jr["name"] = r.name;
    jr["reactants"] = write_column(r.reactants, net.species_names());
    jr["products"] = write_column(r.products, net.species_names());
    if (r.mass_action_param && r.rate == mass_action_expr(*r.mass_action_param, r.reactants))
      jr["rate"] = {{"mass_action", net.parameter_names()[*r.mass_action_param]}};
    else
      jr["rate"] = {{"expr", r.rate.to_string(net.parameter_names(), net.species_names())}};
    rxns.push_back(std::move(jr));
  }
  doc["reactions"] = std::move(rxns);
  return doc;
}

Network parse_model(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ModelError(std::string("schema violation: invalid JSON: ") + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const Json::exception& e) {
    throw ModelError(std::string("schema violation: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

Network load_model(const std::string& path) { return parse_model(read_text_file(path)); }

std::string serialize_model(const Network& net) { return model_to_json(net).dump(2) + "\n"; }

}  // namespace netreduce
