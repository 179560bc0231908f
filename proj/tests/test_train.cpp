#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netreduce/fim.hpp"
#include "netreduce/simulate.hpp"
#include "netreduce/train.hpp"
#include "test_support.hpp"

using namespace netreduce;

namespace {

struct Instance {
  Network net;
  TimeSeries ts;
  ReducedModel red;
};

Instance make_instance(std::mt19937_64& gen, double kappa, bool nonlinear) {
  for (;;) {
    Network net = nrtest::random_network(gen, {.nonlinear = nonlinear});
    TimeSeries ts = simulate(net, {Method::ode, 2.0, 0.02}, 0);
    const InformationRanking r = fim_diag_mean_field(net, net.parameter_values(), ts);
    ReducedModel red = reduce(net, rank_and_select(r, kappa), ts);
    if (red.network.num_species() == 0) continue;
    return {std::move(net), std::move(ts), std::move(red)};
  }
}

}  // namespace

TEST(Train, PseudoInverseOfSingularMatrix) {
  Matrix m(3, 3);
  m << 2, 1, 0, 1, 2, 0, 0, 0, 0;
  const PseudoInverse p = pseudo_inverse(m);
  EXPECT_EQ(p.rank, 2u);
  EXPECT_LT((m * p.inverse * m - m).norm(), 1e-14);
  EXPECT_LT((p.inverse * m * p.inverse - p.inverse).norm(), 1e-14);
  EXPECT_NEAR(p.log_det, std::log(3.0), 1e-14);
  Matrix asym = m;
  asym(0, 2) = 1.0;
  EXPECT_THROW(pseudo_inverse(asym), std::invalid_argument);
  EXPECT_EQ(pseudo_inverse(Matrix::Zero(2, 2)).rank, 0u);
}

TEST(Train, LossMatchesDenseOracle) {
  std::mt19937_64 gen(31);
  for (int n = 0; n < 15; ++n) {
    const Instance in = make_instance(gen, 0.9, true);
    const LossEvaluator eval(in.red, in.net, in.net.parameter_values(), in.ts);
    Vector theta = in.red.theta0();
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] *= nrtest::log_uniform(gen, 0.5, 2.0);
    const double want = nrtest::dense_loss(in.red, in.net, in.ts, theta);
    EXPECT_LT(nrtest::rel_err(eval.loss(theta), want), 1e-9) << n;
  }
}

TEST(Train, IdentityReductionHasZeroLossAndStaysPut) {
  std::mt19937_64 gen(2);
  for (int n = 0; n < 5; ++n) {
    const Instance in = make_instance(gen, 1.0, true);
    const TrainingResult fit = train(in.red, in.net, in.net.parameter_values(), in.ts);
    EXPECT_EQ(fit.loss_value, 0.0);
    EXPECT_EQ(fit.theta_star, fit.theta0);
    EXPECT_EQ(fit.iterations, 0u);
  }
}

TEST(Train, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  for (int n = 0; n < 10; ++n) {
    const Instance in = make_instance(gen, 0.9, true);
    const LossEvaluator eval(in.red, in.net, in.net.parameter_values(), in.ts);
    Vector theta = in.red.theta0();
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] *= nrtest::log_uniform(gen, 0.5, 2.0);
    Vector g(theta.size());
    eval.loss_and_gradient(theta, g);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double h = 1e-5 * theta[k];
      Vector tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fd = (eval.loss(tp) - eval.loss(tm)) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << n << " " << k;
    }
  }
}

TEST(Train, BothOptimizersReachLeastSquaresSolution) {
  std::mt19937_64 gen(99);
  int checked = 0;
  while (checked < 4) {
    const Instance in = make_instance(gen, 0.85, false);
    const Vector ls = nrtest::least_squares_theta(in.red, in.net, in.ts);
    if (!(ls.minCoeff() > 0.0)) continue;
    for (Optimizer o : {Optimizer::nelder_mead, Optimizer::gradient_descent}) {
      TrainOptions opts;
      opts.optimizer = o;
      opts.max_iter = 200000;
      opts.tol = 1e-15;
      const TrainingResult fit = train(in.red, in.net, in.net.parameter_values(), in.ts, opts);
      EXPECT_LT((fit.theta_star - ls).norm() / ls.norm(), 1e-6) << to_string(o);
      EXPECT_LE(fit.loss_value, nrtest::dense_loss(in.red, in.net, in.ts, in.red.theta0()));
    }
    ++checked;
  }
}

TEST(Train, PenaltyPullsTowardInitialValues) {
  std::mt19937_64 gen(5);
  const Instance in = make_instance(gen, 0.85, false);
  TrainOptions free_opts, tied_opts;
  tied_opts.lambda = 1e6;
  const TrainingResult a = train(in.red, in.net, in.net.parameter_values(), in.ts, free_opts);
  const TrainingResult b = train(in.red, in.net, in.net.parameter_values(), in.ts, tied_opts);
  EXPECT_LE((b.theta_star - b.theta0).norm(), (a.theta_star - a.theta0).norm() + 1e-12);
  EXPECT_GE(b.loss_value, a.loss_value - 1e-12);
  EXPECT_THROW(train(in.red, in.net, in.net.parameter_values(), in.ts, {.lambda = -1.0}), std::invalid_argument);
}

TEST(Train, FullLossForMatchedDiffusion) {
  std::mt19937_64 gen(12);
  for (int n = 0; n < 5; ++n) {
    const Instance in = make_instance(gen, 1.0, false);
    const LossEvaluator eval(in.red, in.net, in.net.parameter_values(), in.ts);
    const FullLoss fl = eval.loss_full(in.red.theta0());
    const double d = static_cast<double>(in.red.network.num_species());
    EXPECT_NEAR(fl.relative_entropy, 0.5 * d * static_cast<double>(eval.num_samples()), 1e-9 * d * eval.num_samples());
    EXPECT_EQ(fl.drift, 0.0);
  }
}

TEST(Train, DegenerateMetricIsReported) {
  std::vector<Reaction> rs{make_reaction("in", {}, {{0, 1}}, mass_action_expr(0, {}), 0),
                           make_reaction("out", {{1, 1}}, {}, mass_action_expr(1, {{1, 1}}), 1)};
  const Network net({"A", "B"}, Vector::Zero(2), {"s", "k"}, (Vector(2) << 0.0, 1.0).finished(), rs);
  const TimeSeries ts = simulate(net, {Method::ode, 1.0, 0.1}, 0);
  ReductionMaps maps = build_maps(net, {0}, {0}, {0}, ts);
  const ReducedModel red = build_reduced_model(net, maps);
  EXPECT_THROW(LossEvaluator(red, net, net.parameter_values(), ts), DegenerateMetricError);
}

TEST(Train, FittedJsonCarriesTraining) {
  std::mt19937_64 gen(5);
  const Instance in = make_instance(gen, 0.9, false);
  const TrainingResult fit = train(in.red, in.net, in.net.parameter_values(), in.ts, {.compute_full_loss = true});
  const Json doc = fitted_to_json(in.net, apply_fit(in.red, fit), fit);
  EXPECT_EQ(doc.at("kind"), "fitted");
  EXPECT_TRUE(doc.at("training").contains("loss_full"));
  const ReducedModel back = reduced_from_json(doc);
  EXPECT_EQ(back.theta0(), fit.theta_star);
}
