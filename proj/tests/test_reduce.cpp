#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "netreduce/fim.hpp"
#include "netreduce/reduce.hpp"
#include "netreduce/simulate.hpp"
#include "test_support.hpp"

using namespace netreduce;

namespace {

bool subset(const IndexSet& a, const IndexSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

IndexSet merged(const IndexSet& a, const IndexSet& b, const IndexSet& c) {
  IndexSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

IndexSet iota(std::size_t n) {
  IndexSet out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace

TEST(Reduce, CascadeSelection) {
  const Network net = load_model(nrtest::models_dir() + "/expression_cascade.json");
  const TimeSeries ts = simulate(net, {Method::ode, 5.0, 0.01}, 0);
  const auto V = *net.parameter_index("V");
  const IndexSet J = select_reactions(net, {V});
  ASSERT_EQ(J.size(), 1u);
  const IndexSet S = select_species(net, J);
  const ReductionMaps m = build_maps(net, {V}, J, S, ts);
  const auto E = *net.species_index("E");
  EXPECT_EQ(m.pi_comp1, IndexSet{E});
  EXPECT_EQ(m.gamma_comp1, IndexSet{*net.parameter_index("Km")});
  EXPECT_DOUBLE_EQ(m.y_bar[0], time_average(ts)[static_cast<Eigen::Index>(E)]);
  EXPECT_DOUBLE_EQ(m.u[0], net.parameter_values()[static_cast<Eigen::Index>(m.gamma_comp1[0])]);

  const ReducedModel red = build_reduced_model(net, m);
  EXPECT_EQ(red.network.num_parameters(), 1u);
  const Vector xb = m.project_state(net.initial_state());
  Vector x = net.initial_state();
  x[static_cast<Eigen::Index>(E)] = m.y_bar[0];
  const double full_rate = net.propensity(J[0], x, net.parameter_values());
  EXPECT_NEAR(red.network.propensity(0, xb, red.theta0()), full_rate, 1e-14 * full_rate);
}

TEST(Reduce, MapsPartitionIndices) {
  std::mt19937_64 gen(21);
  for (int n = 0; n < 30; ++n) {
    const Network net = nrtest::random_network(gen, {.nonlinear = true});
    const TimeSeries ts = simulate(net, {Method::ode, 1.0, 0.05}, 0);
    const InformationRanking r = fim_diag_mean_field(net, net.parameter_values(), ts);
    const ReducedModel red = reduce(net, rank_and_select(r, 0.8), ts);
    const ReductionMaps& m = red.maps;
    EXPECT_EQ(merged(m.gamma, m.gamma_comp1, m.gamma_comp2), iota(net.num_parameters()));
    EXPECT_EQ(merged(m.pi, m.pi_comp1, m.pi_comp2), iota(net.num_species()));
    EXPECT_EQ(red.network.num_species(), m.S_P.size());
    EXPECT_EQ(red.network.num_reactions(), m.J_P.size());
    EXPECT_EQ(red.theta0(), m.project_parameters(net.parameter_values()));
  }
}

TEST(Reduce, IdentityReductionReproducesDrift) {
  std::mt19937_64 gen(8);
  for (int n = 0; n < 10; ++n) {
    const Network net = nrtest::random_network(gen, {.nonlinear = true});
    const TimeSeries ts = simulate(net, {Method::ode, 1.0, 0.05}, 0);
    const ReducedModel red = reduce(net, iota(net.num_parameters()), ts);
    ASSERT_EQ(red.network.num_species(), net.num_species());
    for (std::size_t i = 0; i < ts.num_records(); i += 5) {
      const Vector x = ts.state(i);
      EXPECT_EQ(red.network.drift(x, red.theta0()), net.drift(x, net.parameter_values()));
    }
  }
}

TEST(Reduce, Errors) {
  const Network net = load_model(nrtest::models_dir() + "/two_species.json");
  EXPECT_THROW(select_reactions(net, {}), std::invalid_argument);
  EXPECT_THROW(select_reactions(net, {17}), std::out_of_range);
  EXPECT_THROW(select_species(net, {}), std::invalid_argument);
}

TEST(Reduce, NestedAcrossThresholds) {
  std::mt19937_64 gen(4);
  for (int n = 0; n < 20; ++n) {
    const Network net = nrtest::random_network(gen);
    InformationRanking r;
    r.xi = Vector::NullaryExpr(static_cast<Eigen::Index>(net.num_parameters()),
                               [&] { return nrtest::log_uniform(gen, 1e-3, 1e3); });
    r.finalize();
    const IndexSet P1 = rank_and_select(r, 0.9), P2 = rank_and_select(r, 0.99);
    const IndexSet J1 = select_reactions(net, P1), J2 = select_reactions(net, P2);
    EXPECT_TRUE(subset(P1, P2));
    EXPECT_TRUE(subset(J1, J2));
    EXPECT_TRUE(subset(select_species(net, J1), select_species(net, J2)));
  }
}

TEST(Reduce, AugmentAddsReactionsOfSpecies) {
  const Network net = load_model(nrtest::models_dir() + "/two_species.json");
  const TimeSeries ts = simulate(net, {Method::ode, 2.0, 0.01}, 0);
  const ReducedModel base = reduce(net, {*net.parameter_index("k_in")}, ts);
  ASSERT_EQ(base.maps.J_P.size(), 1u);
  const std::size_t A = *net.species_index("A");
  const ReductionMaps aug = augment_with_species(net, base.maps, A);
  EXPECT_EQ(aug.P, base.maps.P);
  EXPECT_EQ(aug.J_P.size(), 3u);
  EXPECT_TRUE(subset(base.maps.J_P, aug.J_P));
  const ReducedModel red = build_reduced_model(net, aug);
  EXPECT_EQ(red.network.num_reactions(), 3u);
  EXPECT_THROW(augment_with_species(net, base.maps, *net.species_index("B")), std::invalid_argument);
}

TEST(Reduce, JsonRoundTrip) {
  const Network net = load_model(nrtest::models_dir() + "/expression_cascade.json");
  const TimeSeries ts = simulate(net, {Method::ode, 3.0, 0.01}, 0);
  const InformationRanking r = fim_diag_mean_field(net, net.parameter_values(), ts);
  const ReducedModel red = reduce(net, rank_and_select(r, 0.9), ts);
  const Json doc = reduced_to_json(net, red);
  EXPECT_EQ(doc.at("kind"), "reduced");
  const ReducedModel back = reduced_from_json(Json::parse(doc.dump()));
  EXPECT_EQ(back.maps.P, red.maps.P);
  EXPECT_EQ(back.maps.J_P, red.maps.J_P);
  EXPECT_EQ(back.maps.pi_comp1, red.maps.pi_comp1);
  EXPECT_EQ(back.maps.y_bar, red.maps.y_bar);
  EXPECT_EQ(back.maps.u, red.maps.u);
  EXPECT_EQ(serialize_model(back.network), serialize_model(red.network));
  EXPECT_EQ(reduced_to_json(net, back).dump(), doc.dump());
}
