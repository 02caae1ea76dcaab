#include "trapping/dynamics.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace trapping {
namespace {

Point random_point(std::mt19937_64& rng, const HyperBox& b) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(b.dim());
  for (std::size_t d = 0; d < b.dim(); ++d) x[d] = b.lower(d) + b.width(d) * u(rng);
  return x;
}

double l1_dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double l2_dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double inf_dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

// Lipschitz and sup-norm bounds hold on random samples.
void expect_sound_bounds(const DynamicsModel& model, const HyperBox& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double lip = *model.lipschitz_upper(box);
  const double sup = *model.sup_norm_upper(box);
  for (int i = 0; i < 1000; ++i) {
    Point x = random_point(rng, box), y = random_point(rng, box);
    Point fx = model.eval(x), fy = model.eval(y);
    EXPECT_LE(inf_dist(fx, fy), lip * l1_dist(x, y) * (1 + 1e-12) + 1e-15);
    // Per-component Euclidean bound used by the face test.
    EXPECT_LE(inf_dist(fx, fy), lip * l2_dist(x, y) * (1 + 1e-12) + 1e-15);
    EXPECT_LE(max_abs(fx), sup * (1 + 1e-12));
  }
}

TEST(DiracGanTest, EquilibriumAtOrigin) {
  for (double eps : {0.01, 0.1, 1.0}) {
    EXPECT_EQ(make_dirac_gan({eps})->eval(Point{0, 0}), (Point{0, 0}));
  }
}

TEST(DiracGanTest, CornerDegeneracyAtEps004) {
  Point f = make_dirac_gan({0.04})->eval(Point{-0.1, 0.1});
  // Zero in exact arithmetic; IEEE rounding leaves one ulp of 0.004.
  EXPECT_NEAR(f[0], 0.0, 1e-17);
}

TEST(DiracGanTest, CornerValueOfSqrtEpsSquare) {
  for (double eps : {0.01, 0.05, 0.2}) {
    const double r = std::sqrt(eps);
    Point f = make_dirac_gan({eps})->eval(Point{-r, r});
    EXPECT_NEAR(f[0], 3 * eps * r, 1e-14);
    EXPECT_GT(f[0], 0.0);
  }
}

TEST(DiracGanTest, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(make_dirac_gan({0.0}), InvalidArgument);
  EXPECT_THROW(make_dirac_gan({-0.1}), InvalidArgument);
}

TEST(DiracGanTest, OddField) {
  auto m = make_dirac_gan({0.07});
  std::mt19937_64 rng(1);
  HyperBox b({-1, -1}, {1, 1});
  for (int i = 0; i < 200; ++i) {
    Point x = random_point(rng, b);
    Point fx = m->eval(x), fm = m->eval(Point{-x[0], -x[1]});
    EXPECT_EQ(fm[0], -fx[0]);
    EXPECT_EQ(fm[1], -fx[1]);
  }
}

// F equals the negated own-loss gradients, checked with central differences
// of L1 = psi^4 + eps psi theta and L2 = theta^4 - eps psi theta.
TEST(DiracGanTest, MatchesLossGradients) {
  const double eps = 0.3;
  auto m = make_dirac_gan({eps});
  auto l1 = [&](double p, double t) { return p * p * p * p + eps * p * t; };
  auto l2 = [&](double p, double t) { return t * t * t * t - eps * p * t; };
  std::mt19937_64 rng(2);
  HyperBox b({-1, -1}, {1, 1});
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    Point x = random_point(rng, b);
    Point f = m->eval(x);
    double g1 = -(l1(x[0] + h, x[1]) - l1(x[0] - h, x[1])) / (2 * h);
    double g2 = -(l2(x[0], x[1] + h) - l2(x[0], x[1] - h)) / (2 * h);
    EXPECT_LE(std::abs(f[0] - g1), 1e-6 * std::max(1.0, std::abs(g1)));
    EXPECT_LE(std::abs(f[1] - g2), 1e-6 * std::max(1.0, std::abs(g2)));
  }
}

TEST(DiracGanTest, AnalyticBoundsOnSymmetricSquare) {
  auto m = make_dirac_gan({0.01});
  HyperBox b({-0.1, -0.1}, {0.1, 0.1});
  EXPECT_NEAR(*m->lipschitz_upper(b), 12 * 0.01 + 0.01, 1e-15);
  EXPECT_NEAR(*m->sup_norm_upper(b), 4 * 0.001 + 0.01 * 0.1, 1e-15);
}

TEST(DiracGanTest, BoundsAreSound) {
  expect_sound_bounds(*make_dirac_gan({0.1}), HyperBox({-0.2, -0.2}, {0.2, 0.2}), 3);
  expect_sound_bounds(*make_dirac_gan({0.5}), HyperBox({-0.3, 0.1}, {0.9, 0.7}), 4);
}

TEST(CournotTest, ReferenceDuopolyValues) {
  auto m = make_cournot(CournotParams::reference_duopoly());
  Point f = m->eval(Point{0.15, 0.1});
  EXPECT_NEAR(f[0], 0.18, 1e-15);
  EXPECT_NEAR(f[1], 0.285, 1e-15);
  f = m->eval(Point{0.3, 0.3});
  EXPECT_NEAR(f[0], -0.16, 1e-15);
  EXPECT_NEAR(f[1], -0.13, 1e-15);
}

TEST(CournotTest, SingleFirmStationaryPoint) {
  auto m = make_cournot({1.0, {{1.0}}, {0.0}});
  EXPECT_NEAR(m->eval(Point{0.2})[0], 0.6, 1e-15);
  EXPECT_EQ(m->eval(Point{0.5})[0], 0.0);
}

TEST(CournotTest, GradientOfPayoff) {
  CournotParams p = CournotParams::reference_duopoly();
  auto m = make_cournot(p);
  const double h = 1e-6;
  Point x{0.21, 0.17};
  Point f = m->eval(x);
  for (std::size_t i = 0; i < 2; ++i) {
    Point up = x, dn = x;
    up[i] += h;
    dn[i] -= h;
    EXPECT_NEAR(f[i], (p.payoff(i, up) - p.payoff(i, dn)) / (2 * h), 1e-8);
  }
}

TEST(CournotTest, LipschitzIsExactInducedBound) {
  auto m = make_cournot(CournotParams::reference_duopoly());
  EXPECT_NEAR(*m->lipschitz_upper(HyperBox({0.15, 0.1}, {0.3, 0.3})), 2.2, 1e-15);
}

TEST(CournotTest, SupNormMatchesCornerEnumeration) {
  auto m = make_cournot(CournotParams::reference_duopoly());
  HyperBox b({0.15, 0.1}, {0.3, 0.3});
  double corner_max = 0;
  for (double x : {0.15, 0.3}) {
    for (double y : {0.1, 0.3}) corner_max = std::max(corner_max, max_abs(m->eval(Point{x, y})));
  }
  EXPECT_NEAR(*m->sup_norm_upper(b), corner_max, 1e-15);
  EXPECT_NEAR(corner_max, 0.285, 1e-15);
}

TEST(CournotTest, Superposition) {
  CournotParams p{1.0, {{1.0, 0.3, 0.1}, {0.2, 2.0, 0.0}, {0.05, 0.4, 1.5}}, {0.1, 0.2, 0.3}};
  auto m = make_cournot(p);
  std::mt19937_64 rng(5);
  HyperBox b({0, 0, 0}, {1, 1, 1});
  Point f0 = m->eval(Point{0, 0, 0});
  for (int i = 0; i < 100; ++i) {
    Point x = random_point(rng, b), y = random_point(rng, b);
    Point xy(3);
    for (int d = 0; d < 3; ++d) xy[d] = x[d] + y[d];
    Point fx = m->eval(x), fy = m->eval(y), fxy = m->eval(xy);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(fxy[d] - f0[d], (fx[d] - f0[d]) + (fy[d] - f0[d]), 1e-14);
  }
  expect_sound_bounds(*m, b, 6);
}

TEST(CournotTest, RejectsInvalidParams) {
  EXPECT_THROW(make_cournot({1.0, {{0.0}}, {0.1}}), InvalidArgument);
  EXPECT_THROW(make_cournot({1.0, {{1.0, -0.1}, {0.0, 1.0}}, {0.1, 0.1}}), InvalidArgument);
  EXPECT_THROW(make_cournot({1.0, {{1.0}}, {0.1, 0.1}}), InvalidArgument);
  EXPECT_THROW(make_cournot({1.0, {{1.0}}, {-0.1}}), InvalidArgument);
}

TEST(AffineTest, Examples) {
  auto neg = make_affine({{-1, 0}, {0, -1}}, {0, 0});
  EXPECT_EQ(neg->eval(Point{1, -1}), (Point{-1, 1}));
  auto rot = make_affine({{0, -1}, {1, 0}}, {0, 0});
  EXPECT_EQ(rot->eval(Point{-1, 0}), (Point{0, -1}));
  auto id = make_affine({{1, 0}, {0, 1}}, {0, 0});
  EXPECT_LT(id->eval(Point{-1, 0.3})[0], 0.0);
}

TEST(AffineTest, ShapeAndFinitenessChecks) {
  EXPECT_THROW(make_affine({{1, 0}}, {0, 0}), InvalidArgument);
  EXPECT_THROW(make_affine({{1, 0}, {0}}, {0, 0}), InvalidArgument);
  EXPECT_THROW(make_affine({{NAN}}, {0}), InvalidArgument);
  auto m = make_affine({{1}}, {0});
  EXPECT_THROW(m->eval(Point{1, 2}), EvaluationError);
}

TEST(AffineTest, RandomBoundsAreSound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 1 + t % 3;
    Matrix a(n, Point(n));
    Point b(n);
    for (auto& row : a) {
      for (double& v : row) v = u(rng);
    }
    for (double& v : b) v = u(rng);
    Point lo(n, -1), hi(n, 1);
    expect_sound_bounds(*make_affine(a, b), HyperBox(lo, hi), 100 + t);
  }
}

TEST(FiniteDifferenceTest, ForwardQuotient) {
  PayoffOracle o;
  o.rewards = [](std::span<const double> x) { return Point{-x[0] * x[0]}; };
  o.delta = 0.1;
  auto m = make_finite_difference(o);
  EXPECT_NEAR(m->eval(Point{1.0})[0], -2.1, 1e-12);
}

TEST(FiniteDifferenceTest, ConstantRewardGivesZero) {
  for (double delta : {1e-3, 0.1, 2.0}) {
    PayoffOracle o{AgentLayout::scalar_agents(3), [](std::span<const double>) { return Point{4, 5, 6}; }, delta};
    EXPECT_EQ(make_finite_difference(o)->eval(Point{0.1, 0.2, 0.3}), (Point{0, 0, 0}));
  }
}

TEST(FiniteDifferenceTest, QuadraticIdentity) {
  const double delta = 0.1;
  PayoffOracle o{AgentLayout::scalar_agents(2),
                 [](std::span<const double> x) { return Point{-x[0] * x[0], -x[1] * x[1]}; }, delta};
  auto m = make_finite_difference(o);
  std::mt19937_64 rng(12);
  HyperBox b({-1, -1}, {1, 1});
  for (int i = 0; i < 50; ++i) {
    Point x = random_point(rng, b);
    Point f = m->eval(x);
    EXPECT_NEAR(f[0], -2 * x[0] - delta, 1e-12);
    EXPECT_NEAR(f[1], -2 * x[1] - delta, 1e-12);
  }
}

TEST(FiniteDifferenceTest, UsesOwnAgentReward) {
  // Agent 0 owns coordinates 0,1; agent 1 owns coordinate 2.
  PayoffOracle o{AgentLayout({2, 1}),
                 [](std::span<const double> x) { return Point{x[0] + 3 * x[1] + 100 * x[2], 7 * x[2] + 100 * x[0]}; },
                 0.5};
  Point f = make_finite_difference(o)->eval(Point{0.1, 0.2, 0.3});
  EXPECT_NEAR(f[0], 1.0, 1e-12);
  EXPECT_NEAR(f[1], 3.0, 1e-12);
  EXPECT_NEAR(f[2], 7.0, 1e-12);
}

TEST(FiniteDifferenceTest, ErrorsPropagate) {
  PayoffOracle nan_oracle{AgentLayout::scalar_agents(1), [](std::span<const double>) { return Point{NAN}; }, 0.1};
  EXPECT_THROW(make_finite_difference(nan_oracle)->eval(Point{0.0}), EvaluationError);

  PayoffOracle failing{AgentLayout::scalar_agents(1),
                       [](std::span<const double>) -> Point { throw std::runtime_error("simulator crashed"); }, 0.1};
  EXPECT_THROW(make_finite_difference(failing)->eval(Point{0.0}), EvaluationError);

  PayoffOracle bad{AgentLayout::scalar_agents(1), [](std::span<const double>) { return Point{1.0}; }, 0.0};
  EXPECT_THROW(make_finite_difference(bad), InvalidArgument);
}

// Acceptance check for the adapter: relative error <= 2 delta against the
// analytic gradient of quadratic payoffs on unit-scale inputs.
TEST(FiniteDifferenceTest, QuadraticPayoffsWithinTwoDelta) {
  const double delta = 1e-3;
  // R_i(x) = -(x_i - t_i)^2 + x_i * sum_{j != i} c x_j
  const Point target{0.3, -0.4, 0.8};
  const double c = 0.25;
  PayoffOracle o{AgentLayout::scalar_agents(3),
                 [&](std::span<const double> x) {
                   Point r(3);
                   for (std::size_t i = 0; i < 3; ++i) {
                     double others = 0;
                     for (std::size_t j = 0; j < 3; ++j) {
                       if (j != i) others += x[j];
                     }
                     r[i] = -(x[i] - target[i]) * (x[i] - target[i]) + c * x[i] * others;
                   }
                   return r;
                 },
                 delta};
  auto m = make_finite_difference(o);
  std::mt19937_64 rng(21);
  HyperBox b({-1, -1, -1}, {1, 1, 1});
  for (int t = 0; t < 100; ++t) {
    Point x = random_point(rng, b);
    Point f = m->eval(x);
    for (std::size_t i = 0; i < 3; ++i) {
      double others = 0;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j != i) others += x[j];
      }
      const double g = -2 * (x[i] - target[i]) + c * others;
      EXPECT_LE(std::abs(f[i] - g), 2 * delta * std::max(1.0, std::abs(g)));
    }
  }
}

TEST(TableModelTest, InterpolatesAffineDataExactly) {
  // F(x) = (1 - 2x, 0.5 y - x) tabulated on a coarse grid.
  std::vector<Point> axes{{0, 0.5, 1}, {-1, 0, 2}};
  std::vector<Point> values;
  for (double x : axes[0]) {
    for (double y : axes[1]) values.push_back({1 - 2 * x, 0.5 * y - x});
  }
  TableModel m(axes, values);
  Point f = m.eval(Point{0.3, 1.2});
  EXPECT_NEAR(f[0], 1 - 0.6, 1e-14);
  EXPECT_NEAR(f[1], 0.6 - 0.3, 1e-14);
  EXPECT_THROW(m.eval(Point{1.1, 0}), EvaluationError);
  EXPECT_FALSE(m.lipschitz_upper(HyperBox({0, 0}, {1, 1})).has_value());
  EXPECT_THROW(TableModel({{0, 1}}, {{1}}), InvalidArgument);
  EXPECT_THROW(TableModel({{1, 0}}, {{1}, {2}}), InvalidArgument);
}

TEST(FunctionModelTest, NonFiniteOutputIsEvaluationError) {
  FunctionModel m(1, [](std::span<const double>, std::span<double> out) { out[0] = INFINITY; });
  EXPECT_THROW(m.eval(Point{0}), EvaluationError);
}

}  // namespace
}  // namespace trapping
