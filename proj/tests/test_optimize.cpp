#include <gtest/gtest.h>

#include <cmath>

#include "netreduce/optimize.hpp"

using netreduce::gradient_descent;
using netreduce::nelder_mead;
using Eigen::VectorXd;

namespace {

double rosenbrock(const VectorXd& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); }

}  // namespace

TEST(Optimize, NelderMeadFindsRosenbrockMinimum) {
  const auto r = nelder_mead(rosenbrock, VectorXd::Constant(2, -1.0));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Optimize, NelderMeadOnQuadratic) {
  const VectorXd target = (VectorXd(3) << 0.3, -2.0, 5.0).finished();
  auto f = [&](const VectorXd& x) { return (x - target).squaredNorm() + 1.0; };
  const auto r = nelder_mead(f, VectorXd::Zero(3));
  EXPECT_LT((r.x - target).norm(), 1e-5);
  EXPECT_NEAR(r.f, 1.0, 1e-10);
}

TEST(Optimize, NelderMeadStopsOnFlatValley) {
  auto f = [](const VectorXd& x) { return std::pow(x[0] - x[1], 2); };
  const auto r = nelder_mead(f, (VectorXd(2) << 1.0, 0.0).finished());
  EXPECT_LT(r.f, 1e-12);
  EXPECT_LT(r.iterations, 20000u);
}

TEST(Optimize, GradientDescentOnQuadratic) {
  const VectorXd target = (VectorXd(2) << 1.0, -1.0).finished();
  auto fg = [&](const VectorXd& x, VectorXd& g) {
    const VectorXd r = x - target;
    g = 2.0 * (VectorXd(2) << r[0], 10.0 * r[1]).finished();
    return r[0] * r[0] + 10.0 * r[1] * r[1];
  };
  const auto r = gradient_descent(fg, VectorXd::Zero(2));
  EXPECT_LT((r.x - target).norm(), 1e-5);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Optimize, ZeroAtStartReturnsImmediately) {
  auto f = [](const VectorXd& x) { return x.squaredNorm(); };
  const auto r = nelder_mead(f, VectorXd::Zero(4));
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.f, 0.0);
}
