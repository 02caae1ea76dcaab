#include "trapping/geometry.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace trapping {
namespace {

TEST(HyperBoxTest, RejectsInvalidBounds) {
  EXPECT_THROW(HyperBox({0.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(HyperBox({1.0}, {0.0}), InvalidArgument);
  EXPECT_THROW(HyperBox({0.0, 0.0}, {1.0}), InvalidArgument);
  EXPECT_THROW(HyperBox({}, {}), InvalidArgument);
  EXPECT_THROW(HyperBox({0.0}, {INFINITY}), InvalidArgument);
  EXPECT_THROW(HyperBox({NAN}, {1.0}), InvalidArgument);
}

TEST(HyperBoxTest, ClosedMembership) {
  HyperBox b({-1, -1}, {1, 1});
  EXPECT_TRUE(b.contains(Point{1.0, -1.0}));
  EXPECT_FALSE(b.contains(Point{1.0000001, 0.0}));
}

TEST(AgentLayoutTest, FlattensAgentCoordinates) {
  AgentLayout layout({2, 1, 3});
  EXPECT_EQ(layout.total_dim(), 6u);
  EXPECT_EQ(layout.flatten(0, 1), 1u);
  EXPECT_EQ(layout.flatten(1, 0), 2u);
  EXPECT_EQ(layout.flatten(2, 2), 5u);
  for (std::size_t d = 0; d < 6; ++d) {
    auto [i, j] = layout.unflatten(d);
    EXPECT_EQ(layout.flatten(i, j), d);
  }
  EXPECT_THROW(layout.flatten(1, 1), InvalidArgument);
  EXPECT_THROW(layout.unflatten(6), InvalidArgument);
}

TEST(FacesTest, UnitSquare) {
  auto fs = faces(HyperBox({0, 0}, {1, 1}));
  ASSERT_EQ(fs.size(), 4u);
  EXPECT_EQ(fs[0].pinned_index, 0u);
  EXPECT_EQ(fs[0].side, Side::left);
  EXPECT_EQ(fs[0].pinned_value, 0.0);
  EXPECT_EQ(fs[1].pinned_index, 0u);
  EXPECT_EQ(fs[1].side, Side::right);
  EXPECT_EQ(fs[1].pinned_value, 1.0);
  EXPECT_EQ(fs[2].pinned_index, 1u);
  EXPECT_EQ(fs[2].side, Side::left);
  EXPECT_EQ(fs[3].pinned_value, 1.0);
  EXPECT_EQ(*fs[0].profile, HyperBox({0}, {1}));
}

TEST(FacesTest, PinnedValuesOfGanCandidate) {
  for (const Face& f : faces(HyperBox({-0.1, -0.1}, {0.1, 0.1}))) {
    EXPECT_EQ(std::abs(f.pinned_value), 0.1);
    EXPECT_EQ(f.pinned_value < 0, f.side == Side::left);
  }
}

TEST(FacesTest, OneDimensionalBoxHasPointFaces) {
  auto fs = faces(HyperBox({-1}, {1}));
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_TRUE(fs[0].is_point());
  EXPECT_TRUE(fs[1].is_point());
  EXPECT_EQ(diameter(fs[0]), 0.0);
  EXPECT_EQ(baricenter(fs[1]), Point{1.0});
}

TEST(FacesTest, ProfileDropsPinnedCoordinate) {
  HyperBox b({0, 1, 2}, {1, 3, 5});
  auto fs = faces(b);
  EXPECT_EQ(*fs[2].profile, HyperBox({0, 2}, {1, 5}));
  EXPECT_EQ(fs[3].pinned_value, 3.0);
}

// Every boundary point lies on at least one returned face.
TEST(FacesTest, CoverBoundary) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HyperBox b({-1, 0, 2}, {1, 0.5, 3});
  auto fs = faces(b);
  for (int trial = 0; trial < 500; ++trial) {
    Point x(3);
    for (std::size_t d = 0; d < 3; ++d) x[d] = b.lower(d) + b.width(d) * u(rng);
    std::size_t pin = trial % 3;
    x[pin] = (trial / 3) % 2 ? b.upper(pin) : b.lower(pin);
    bool on_face = false;
    for (const Face& f : fs) {
      if (x[f.pinned_index] != f.pinned_value) continue;
      Point rest;
      for (std::size_t d = 0; d < 3; ++d) {
        if (d != f.pinned_index) rest.push_back(x[d]);
      }
      on_face = on_face || f.profile->contains(rest);
    }
    EXPECT_TRUE(on_face);
  }
}

TEST(SplitTest, LongestDimensionMidpoint) {
  auto [a, b] = split(HyperBox({0, 0}, {1, 4}));
  EXPECT_EQ(a, HyperBox({0, 0}, {1, 2}));
  EXPECT_EQ(b, HyperBox({0, 2}, {1, 4}));
}

TEST(SplitTest, TieGoesToLowestIndex) {
  auto [a, b] = split(HyperBox({0, 0}, {2, 2}));
  EXPECT_EQ(a, HyperBox({0, 0}, {1, 2}));
  EXPECT_EQ(b, HyperBox({1, 0}, {2, 2}));
}

TEST(SplitTest, OneDimensional) {
  auto [a, b] = split(HyperBox({-0.1}, {0.1}));
  EXPECT_EQ(a, HyperBox({-0.1}, {0.0}));
  EXPECT_EQ(b, HyperBox({0.0}, {0.1}));
}

TEST(SplitTest, HalvesPartitionParent) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    Point lo(n), hi(n);
    for (std::size_t d = 0; d < n; ++d) {
      double p = u(rng), q = u(rng);
      lo[d] = std::min(p, q);
      hi[d] = std::max(p, q) + 1e-3;
    }
    HyperBox box(lo, hi);
    const std::size_t k = longest_dimension(box);
    auto [a, b] = split(box);
    for (std::size_t d = 0; d < n; ++d) {
      EXPECT_EQ(a.lower(d), box.lower(d));
      EXPECT_EQ(b.upper(d), box.upper(d));
      if (d == k) {
        EXPECT_EQ(a.upper(d), b.lower(d));
        EXPECT_NEAR(a.width(d), box.width(d) / 2, 1e-15 * box.width(d) + 1e-15);
      } else {
        EXPECT_EQ(a.upper(d), box.upper(d));
        EXPECT_EQ(b.lower(d), box.lower(d));
      }
    }
  }
}

TEST(SplitTest, RefusesWhenPrecisionIsExhausted) {
  const double lo = 0.1;
  const double hi = std::nextafter(lo, 1.0);
  HyperBox box({lo}, {hi});
  EXPECT_FALSE(splittable(box));
  EXPECT_THROW(split(box), InvalidArgument);
}

TEST(BaricenterTest, Examples) {
  EXPECT_EQ(baricenter(HyperBox({0, 0}, {2, 2})), (Point{1, 1}));
  auto fs = faces(HyperBox({-1, -1}, {1, 1}));
  EXPECT_EQ(baricenter(fs[0]), (Point{-1, 0}));
  Point c = baricenter(HyperBox({0.15, 0.1}, {0.3, 0.3}));
  EXPECT_DOUBLE_EQ(c[0], 0.225);
  EXPECT_DOUBLE_EQ(c[1], 0.2);
}

TEST(DiameterTest, Examples) {
  EXPECT_DOUBLE_EQ(diameter(HyperBox({0, 0}, {3, 4})), 5.0);
  EXPECT_DOUBLE_EQ(diameter(HyperBox({-0.1, -0.1}, {0.1, 0.1})), 0.2 * std::sqrt(2.0));
}

TEST(EmbedTest, ReinsertsPinnedCoordinate) {
  auto sq = faces(HyperBox({-1, -1}, {1, 1}));
  EXPECT_EQ(embed(sq[0], Point{0.5}), (Point{-1, 0.5}));

  auto cube = faces(HyperBox({-1, -1, -1}, {1, 1, 1}));
  EXPECT_EQ(embed(cube[3], Point{0, 0}), (Point{0, 1, 0}));

  auto line = faces(HyperBox({-1}, {1}));
  EXPECT_EQ(embed(line[0], Point{}), (Point{-1}));
  EXPECT_THROW(embed(sq[0], Point{0, 0}), InvalidArgument);
}

TEST(GridSampleTest, OneDimensionalProfile) {
  auto fs = faces(HyperBox({-0.2, -0.2}, {0.2, 0.2}));
  FaceMesh m = grid_sample(fs[0], 5);
  ASSERT_EQ(m.points.size(), 5u);
  const double expected[] = {-0.2, -0.1, 0.0, 0.1, 0.2};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(m.points[i][0], -0.2);
    EXPECT_NEAR(m.points[i][1], expected[i], 1e-15);
  }
  EXPECT_DOUBLE_EQ(m.mesh_radius, 0.05);
}

TEST(GridSampleTest, FourDimensionalFaceHas125Points) {
  auto fs = faces(HyperBox({20, 20, 20, 20}, {40, 40, 40, 40}));
  for (const Face& f : fs) EXPECT_EQ(grid_sample(f, 5).points.size(), 125u);
}

TEST(GridSampleTest, PointFace) {
  auto fs = faces(HyperBox({-1}, {1}));
  FaceMesh m = grid_sample(fs[1], 7);
  ASSERT_EQ(m.points.size(), 1u);
  EXPECT_EQ(m.points[0], Point{1});
  EXPECT_EQ(m.mesh_radius, 0.0);
}

TEST(GridSampleTest, RejectsTooFewPoints) {
  auto fs = faces(HyperBox({0, 0}, {1, 1}));
  EXPECT_THROW(grid_sample(fs[0], 1), InvalidArgument);
}

TEST(GridSampleTest, RadiusFormulaAndLexicographicOrder) {
  HyperBox b({0, 0, 0}, {1, 2, 4});
  FaceMesh m = grid_sample(faces(b)[0], 3);
  EXPECT_DOUBLE_EQ(m.mesh_radius, 0.5 * std::sqrt(1.0 + 4.0));
  ASSERT_EQ(m.points.size(), 9u);
  EXPECT_EQ(m.points[0], (Point{0, 0, 0}));
  EXPECT_EQ(m.points[1], (Point{0, 0, 2}));
  EXPECT_EQ(m.points[3], (Point{0, 1, 0}));
  EXPECT_EQ(m.points[8], (Point{0, 2, 4}));
}

// Random face points are within mesh_radius of some mesh point, and every
// mesh point lies on the face.
TEST(GridSampleTest, CoveringRadiusHolds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HyperBox b({-1, 0, 0.5}, {1, 0.3, 2.5});
  for (const Face& f : faces(b)) {
    for (std::size_t k : {2u, 3u, 6u}) {
      FaceMesh m = grid_sample(f, k);
      for (const Point& p : m.points) {
        EXPECT_EQ(p[f.pinned_index], f.pinned_value);
        EXPECT_TRUE(b.contains(p));
      }
      for (int trial = 0; trial < 200; ++trial) {
        Point x(3);
        for (std::size_t d = 0; d < 3; ++d) x[d] = b.lower(d) + b.width(d) * u(rng);
        x[f.pinned_index] = f.pinned_value;
        double best = INFINITY;
        for (const Point& p : m.points) {
          double s = 0;
          for (std::size_t d = 0; d < 3; ++d) s += (x[d] - p[d]) * (x[d] - p[d]);
          best = std::min(best, std::sqrt(s));
        }
        EXPECT_LE(best, m.mesh_radius + 1e-12);
      }
    }
  }
}

TEST(GeometryTest, PureFunctionsAreBitIdentical) {
  HyperBox b({-0.3, 0.1, 2}, {0.7, 0.4, 2.2});
  for (const Face& f : faces(b)) {
    auto m1 = grid_sample(f, 4);
    auto m2 = grid_sample(f, 4);
    EXPECT_EQ(m1.points, m2.points);
    EXPECT_EQ(m1.mesh_radius, m2.mesh_radius);
  }
  EXPECT_EQ(split(b).first, split(b).first);
}

}  // namespace
}  // namespace trapping
