#include <gtest/gtest.h>

#include "upsilon/fixtures.hpp"
#include "upsilon/surface.hpp"

using namespace upsilon;

namespace {

DivisorConfiguration make(std::vector<std::pair<std::string, Rat>> comps, std::vector<std::vector<long>> m) {
  DivisorConfiguration c;
  for (auto& [n, d] : comps) c.components.push_back({n, d});
  c.intersection = std::move(m);
  return c;
}

}  // namespace

TEST(Surface, Validation) {
  EXPECT_TRUE(validate(make({{"C", Rat(1)}}, {{1}})));
  EXPECT_TRUE(validate(fixtures::generic_lines(2)));
  auto asym = make({{"A", Rat(1)}, {"B", Rat(1)}}, {{1, 2}, {1, 1}});
  auto c = check(asym);
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.path, "/intersection/0/1");
  EXPECT_FALSE(validate(make({{"A", Rat(1)}, {"B", Rat(1)}}, {{1, -1}, {-1, 1}})));
  EXPECT_FALSE(validate(make({{"A", Rat(-1)}}, {{1}})));
  EXPECT_FALSE(validate(make({{"A", Rat(1)}, {"A", Rat(1)}}, {{1, 0}, {0, 1}})));
  EXPECT_FALSE(validate(make({{"A", Rat(1)}}, {{1, 0}})));
  EXPECT_FALSE(validate(DivisorConfiguration{}));
  EXPECT_TRUE(validate(make({{"A", Rat(0)}}, {{-2}})));
  EXPECT_THROW(require_valid(asym), ValidationError);
}

TEST(Surface, CrossingPoints) {
  EXPECT_TRUE(crossing_points(make({{"C", Rat(1)}}, {{1}})).empty());
  EXPECT_EQ(crossing_points(fixtures::generic_lines(2)), (std::vector<Crossing>{{0, 1, 1}}));
  EXPECT_EQ(crossing_points(make({{"Q1", Rat(2)}, {"Q2", Rat(2)}}, {{4, 4}, {4, 4}})),
            (std::vector<Crossing>{{0, 1, 4}}));
}

TEST(Surface, BlowUpWithoutPoints) {
  PlaneArrangement arr{{{"Q", 2}}, {}};
  auto c = blow_up(arr);
  EXPECT_EQ(c.intersection, (std::vector<std::vector<long>>{{4}}));
  EXPECT_EQ(c.degree(0), Rat(2));
  PlaneArrangement lines{{{"A", 1}, {"B", 1}, {"C", 2}}, {}};
  auto d = blow_up(lines);
  EXPECT_EQ(d.intersection, (std::vector<std::vector<long>>{{1, 1, 2}, {1, 1, 2}, {2, 2, 4}}));
}

TEST(Surface, BlowUpThreeConcurrentLines) {
  auto c = blow_up(fixtures::concurrent_lines(), Rat(1, 10));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.components[3].name, "E_p");
  EXPECT_EQ(c.intersection,
            (std::vector<std::vector<long>>{{0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}, {1, 1, 1, -1}}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(c.degree(i), Rat(9, 10));
  EXPECT_EQ(c.degree(3), Rat(1, 10));
  EXPECT_TRUE(validate(c));
}

TEST(Surface, BlowUpRejections) {
  EXPECT_THROW(blow_up(fixtures::concurrent_lines(), Rat(0)), InvalidArgument);
  EXPECT_THROW(blow_up(fixtures::concurrent_lines(), Rat(2)), ValidationError);
  PlaneArrangement two{{{"A", 1}, {"B", 1}}, {{"p", {"A", "B"}}, {"q", {"A", "B"}}}};
  EXPECT_THROW(blow_up(two), ValidationError);
  PlaneArrangement unknown{{{"A", 1}, {"B", 1}}, {{"p", {"A", "Z"}}}};
  EXPECT_EQ(check(unknown).path, "/points/0/curves/1");
  PlaneArrangement single{{{"A", 1}}, {{"p", {"A"}}}};
  EXPECT_FALSE(check(single).ok);
}

TEST(SurfaceProperty, ConservationAndLinearityInEpsilon) {
  // Conics and lines with various shared points.
  PlaneArrangement arr{{{"A", 1}, {"B", 1}, {"C", 1}, {"Q", 2}},
                       {{"p", {"A", "B", "C"}}, {"q", {"A", "Q"}}, {"s", {"B", "Q"}}, {"t", {"Q", "A"}}}};
  ASSERT_TRUE(check(arr).ok);
  auto lo = blow_up(arr, Rat(1, 10)), hi = blow_up(arr, Rat(1, 20));
  EXPECT_TRUE(validate(lo));
  const std::size_t n = arr.curves.size(), m = arr.points.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long via_points = 0;
      for (std::size_t p = 0; p < m; ++p) via_points += lo(i, n + p) * lo(j, n + p);
      EXPECT_EQ(lo(i, j) + via_points, arr.curves[i].degree * arr.curves[j].degree) << i << "," << j;
    }
  // deg(ε) = d - ε k: slope between the two samples predicts ε = 0.
  for (std::size_t i = 0; i < n + m; ++i) {
    Rat slope = (lo.degree(i) - hi.degree(i)) / (Rat(1, 10) - Rat(1, 20));
    Rat at_zero = lo.degree(i) - slope * Rat(1, 10);
    EXPECT_EQ(at_zero, i < n ? Rat(arr.curves[i].degree) : Rat(0));
  }
}
