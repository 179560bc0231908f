#include <gtest/gtest.h>

#include <random>

#include "netreduce/json_io.hpp"
#include "netreduce/network.hpp"
#include "test_support.hpp"

using namespace netreduce;

namespace {

const char* kMichaelis = R"json({
  "species": [{"name": "S", "initial": 2.0}, {"name": "P", "initial": 0.0}],
  "parameters": [{"name": "V", "value": 1.5}, {"name": "Km", "value": 0.5}, {"name": "k", "value": 0.1}],
  "reactions": [
    {"name": "conv", "reactants": {"S": 1}, "products": {"P": 1}, "rate": {"expr": "V*S/(Km + S)"}},
    {"name": "dim", "reactants": {"P": 2}, "rate": {"mass_action": "k"}}
  ]
})json";

}  // namespace

TEST(Network, ParsesModelAndComputesDriftAndDiffusion) {
  const Network net = parse_model(kMichaelis);
  ASSERT_EQ(net.num_species(), 2u);
  ASSERT_EQ(net.num_reactions(), 2u);
  const Vector x = (Vector(2) << 2.0, 3.0).finished();
  const Vector& c = net.parameter_values();
  const double a0 = 1.5 * 2.0 / 2.5;
  const double a1 = 0.1 * 3.0 * 3.0;
  EXPECT_DOUBLE_EQ(net.propensity(0, x, c), a0);
  EXPECT_DOUBLE_EQ(net.propensity(1, x, c), a1);
  const Vector b = net.drift(x, c);
  EXPECT_DOUBLE_EQ(b[0], -a0);
  EXPECT_DOUBLE_EQ(b[1], a0 - 2.0 * a1);
  const Matrix S = net.diffusion_matrix(x, c);
  EXPECT_DOUBLE_EQ(S(0, 0), a0);
  EXPECT_DOUBLE_EQ(S(0, 1), -a0);
  EXPECT_DOUBLE_EQ(S(1, 1), a0 + 4.0 * a1);
  EXPECT_EQ(net.phi()[0], std::vector<std::size_t>{0});
  EXPECT_EQ(net.phi()[2], std::vector<std::size_t>{1});
}

TEST(Network, MassActionUsesPlainPowers) {
  const Network net = parse_model(kMichaelis);
  const Vector x = (Vector(2) << 1.0, 5.0).finished();
  EXPECT_DOUBLE_EQ(net.propensity(1, x, net.parameter_values()), 0.1 * 25.0);
}

TEST(Network, NegativePropensityIsClamped) {
  const char* doc = R"json({
    "species": [{"name": "A", "initial": 1.0}],
    "parameters": [{"name": "k", "value": 1.0}],
    "reactions": [{"name": "r", "products": {"A": 1}, "rate": {"expr": "k*(1 - A)"}}]
  })json";
  const Network net = parse_model(doc);
  EvalCounters counters;
  const Vector x = (Vector(1) << 3.0).finished();
  EXPECT_EQ(net.propensity(0, x, net.parameter_values(), &counters), 0.0);
  EXPECT_EQ(counters.clamped, 1u);
}

TEST(Network, SerializationRoundTrip) {
  std::mt19937_64 gen(11);
  for (int n = 0; n < 10; ++n) {
    const Network net = nrtest::random_network(gen, {.nonlinear = true});
    const Network back = parse_model(serialize_model(net));
    ASSERT_EQ(back.species_names(), net.species_names());
    ASSERT_EQ(back.parameter_names(), net.parameter_names());
    ASSERT_EQ(back.initial_state(), net.initial_state());
    ASSERT_EQ(back.parameter_values(), net.parameter_values());
    ASSERT_EQ(back.num_reactions(), net.num_reactions());
    for (std::size_t j = 0; j < net.num_reactions(); ++j) {
      EXPECT_EQ(back.reaction(j).reactants, net.reaction(j).reactants);
      EXPECT_EQ(back.reaction(j).products, net.reaction(j).products);
      EXPECT_EQ(back.reaction(j).rate, net.reaction(j).rate);
    }
    EXPECT_EQ(serialize_model(back), serialize_model(net));
  }
}

TEST(Network, RejectsInvalidModels) {
  EXPECT_THROW(parse_model("{not json"), ModelError);
  EXPECT_THROW(parse_model(R"({"species": [], "parameters": []})"), ModelError);
  EXPECT_THROW(parse_model(R"({
    "species": [{"name": "A", "initial": 1}], "parameters": [{"name": "k", "value": 1}],
    "reactions": [{"name": "r", "reactants": {"B": 1}, "rate": {"mass_action": "k"}}]})"),
               ModelError);
  EXPECT_THROW(parse_model(R"({
    "species": [{"name": "A", "initial": 1}], "parameters": [{"name": "k", "value": 1}],
    "reactions": [{"name": "r", "reactants": {"A": -1}, "rate": {"mass_action": "k"}}]})"),
               ModelError);
  EXPECT_THROW(parse_model(R"({
    "species": [{"name": "A", "initial": 1}, {"name": "A", "initial": 2}], "parameters": [],
    "reactions": []})"),
               ModelError);
  EXPECT_THROW(parse_model(R"({
    "species": [{"name": "A", "initial": 1}], "parameters": [{"name": "k", "value": 1}],
    "reactions": [{"name": "r", "reactants": {"A": 1}, "rate": {"expr": "k*Q"}}]})"),
               ModelError);
  EXPECT_THROW(parse_model(R"({
    "species": [{"name": "A", "initial": 1}], "parameters": [{"name": "k", "value": 1}],
    "reactions": [{"name": "r", "reactants": {"A": 1}, "rate": {"mass_action": "k", "expr": "k"}}]})"),
               ModelError);
}

TEST(Network, GradLogPropensityOfMassActionIsInverseParameter) {
  const Network net = parse_model(kMichaelis);
  const Vector x = (Vector(2) << 1.0, 2.0).finished();
  const SparseGradient g = net.grad_log_propensity(1, x, net.parameter_values());
  ASSERT_EQ(g.index, std::vector<std::size_t>{2});
  EXPECT_DOUBLE_EQ(g.value[0], 1.0 / 0.1);
}

TEST(Network, GradLogPropensityThrowsAtZeroPropensity) {
  const Network net = parse_model(kMichaelis);
  const Vector x = Vector::Zero(2);
  EXPECT_THROW(net.grad_log_propensity(1, x, net.parameter_values()), EvalError);
}

TEST(Network, BundledModelsLoad) {
  for (const char* name : {"birth_death.json", "two_species.json", "expression_cascade.json"}) {
    const Network net = load_model(nrtest::models_dir() + "/" + name);
    EXPECT_GT(net.num_reactions(), 0u) << name;
  }
}
