#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "netreduce/expression.hpp"

using netreduce::EvalError;
using netreduce::Expr;
using netreduce::ExprSyntaxError;

namespace {

Expr parse(std::string_view text) {
  return Expr::parse(text, [](std::string_view id) -> Expr {
    if (id == "k0") return Expr::parameter(0);
    if (id == "k1") return Expr::parameter(1);
    if (id == "x0") return Expr::species(0);
    if (id == "x1") return Expr::species(1);
    throw std::invalid_argument("unknown name");
  });
}

const std::array<std::string, 2> kParams{"k0", "k1"};
const std::array<std::string, 2> kSpecies{"x0", "x1"};

}  // namespace

TEST(Expression, EvaluatesArithmetic) {
  const std::array<double, 2> x{2.0, 3.0};
  const std::array<double, 2> c{0.5, 4.0};
  EXPECT_DOUBLE_EQ(parse("k0*x0 + k1/x1").evaluate(x, c), 1.0 + 4.0 / 3.0);
}

TEST(Expression, PrecedenceAndUnaryMinus) {
  const std::array<double, 2> x{2.0, 3.0};
  const std::array<double, 2> c{1.0, 1.0};
  EXPECT_DOUBLE_EQ(parse("-x0^2").evaluate(x, c), -4.0);
  EXPECT_DOUBLE_EQ(parse("2^3^2").evaluate(x, c), 512.0);
  EXPECT_DOUBLE_EQ(parse("(x0 + x1) * 2 - 1").evaluate(x, c), 9.0);
  EXPECT_DOUBLE_EQ(parse("1e-1 * x1").evaluate(x, c), 0.30000000000000004);
}

TEST(Expression, ReferencesAreSortedAndUnique) {
  const Expr e = parse("k1*x1 + k1*x0*x1 + k0");
  EXPECT_EQ(e.parameter_refs(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(e.species_refs(), (std::vector<std::size_t>{0, 1}));
}

TEST(Expression, GradientMatchesFiniteDifferences) {
  const Expr e = parse("k0*x0*x1/(k1 + x0) + k0^2 - x1^1.5");
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<double, 2> x{u(gen), u(gen)};
    std::array<double, 2> c{u(gen), u(gen)};
    std::array<double, 2> dc{};
    std::array<double, 2> dx{};
    const double v = e.gradient(x, c, dc, dx);
    EXPECT_DOUBLE_EQ(v, e.evaluate(x, c));
    for (std::size_t k = 0; k < 2; ++k) {
      const double h = 1e-6;
      auto cp = c, cm = c;
      cp[k] += h;
      cm[k] -= h;
      EXPECT_NEAR(dc[k], (e.evaluate(x, cp) - e.evaluate(x, cm)) / (2 * h), 1e-7);
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      EXPECT_NEAR(dx[k], (e.evaluate(xp, c) - e.evaluate(xm, c)) / (2 * h), 1e-7);
    }
  }
}

TEST(Expression, DivisionByZeroThrows) {
  const std::array<double, 2> x{0.0, 0.0};
  const std::array<double, 2> c{1.0, 0.0};
  EXPECT_THROW(parse("k0 / k1").evaluate(x, c), EvalError);
}

TEST(Expression, SyntaxErrors) {
  EXPECT_THROW(parse("k0 *"), ExprSyntaxError);
  EXPECT_THROW(parse("(k0 + x0"), ExprSyntaxError);
  EXPECT_THROW(parse("k0 $ x0"), ExprSyntaxError);
  EXPECT_ANY_THROW(parse("unknown * 2"));
}

TEST(Expression, RoundTripThroughText) {
  for (const char* text : {"k0*x0*x1", "k0*x0/(k1 + x0)", "-(x0 - x1)^2", "k0 - (k1 - x0)", "x0/(x1/k0)",
                           "2^3^2", "(2^3)^2"}) {
    const Expr e = parse(text);
    const std::string s = e.to_string(kParams, kSpecies);
    EXPECT_EQ(parse(s), e) << text << " -> " << s;
  }
}

TEST(Expression, SubstituteFreezesLeaves) {
  const Expr e = parse("k0*x0 + k1*x1");
  const Expr f = e.substitute(
      [](std::size_t k) {
        Expr::LeafMap m;
        if (k == 0) m.index = 0; else m.constant = 3.0;
        return m;
      },
      [](std::size_t i) {
        Expr::LeafMap m;
        if (i == 1) m.constant = 2.0; else m.index = 0;
        return m;
      });
  EXPECT_EQ(f.parameter_refs(), std::vector<std::size_t>{0});
  EXPECT_EQ(f.species_refs(), std::vector<std::size_t>{0});
  const std::array<double, 1> x{5.0};
  const std::array<double, 1> c{2.0};
  EXPECT_DOUBLE_EQ(f.evaluate(x, c), 2.0 * 5.0 + 3.0 * 2.0);
}
