#include <gtest/gtest.h>

#include "oracles.hpp"
#include "upsilon/random.hpp"
#include "upsilon/subspace.hpp"

using upsilon::Rat;
using upsilon::RatMatrix;
using upsilon::reduce;
using upsilon::span_of;
using upsilon::Subspace;
using upsilon::unit_vector;

TEST(Subspace, DependentRowsCollapse) {
  Subspace s = reduce({{1, 0}, {2, 0}}, 2);
  EXPECT_EQ(s.basis(), (RatMatrix{{1, 0}}));
}

TEST(Subspace, EmptySpanIsZero) {
  Subspace s = reduce({}, 3);
  EXPECT_TRUE(s.is_zero());
  EXPECT_EQ(s.dim(), 0u);
  EXPECT_EQ(s.ambient_dim(), 3u);
}

TEST(Subspace, ReducedRowEchelonByHand) {
  EXPECT_EQ(reduce({{1, 1}, {0, 2}}, 2).basis(), (RatMatrix{{1, 0}, {0, 1}}));
  EXPECT_EQ(reduce({{2, 4, 6}, {1, 1, 1}}, 3).basis(), (RatMatrix{{1, 0, -1}, {0, 1, 2}}));
}

TEST(Subspace, RejectsBadShapes) {
  EXPECT_THROW(reduce({{1, 0, 0}}, 2), upsilon::DimensionMismatch);
  EXPECT_THROW(Subspace::zero(0), upsilon::InvalidArgument);
  EXPECT_THROW(upsilon::intersect(Subspace::full(2), Subspace::full(3)), upsilon::DimensionMismatch);
}

TEST(Subspace, Intersections) {
  Subspace e1 = span_of({unit_vector(2, 0)}, 2), e2 = span_of({unit_vector(2, 1)}, 2);
  EXPECT_TRUE(upsilon::intersect(e1, e2).is_zero());
  EXPECT_EQ(upsilon::intersect(e1, e1), e1);
  Subspace p = span_of({{1, 0, 0}, {0, 1, 0}}, 3), q = span_of({{0, 1, 0}, {0, 0, 1}}, 3);
  EXPECT_EQ(upsilon::intersect(p, q), span_of({{0, 1, 0}}, 3));
  EXPECT_EQ(upsilon::intersection_dim(p, q), 1u);
}

TEST(Subspace, Sums) {
  Subspace e1 = span_of({unit_vector(2, 0)}, 2), e2 = span_of({unit_vector(2, 1)}, 2);
  EXPECT_TRUE(upsilon::subspace_sum(e1, e2).is_full());
  EXPECT_EQ(upsilon::subspace_sum(e1, Subspace::zero(2)), e1);
  Subspace s = upsilon::subspace_sum(span_of({{1, 1, 0}}, 3), span_of({{1, -1, 0}}, 3));
  EXPECT_EQ(s, span_of({{1, 0, 0}, {0, 1, 0}}, 3));
}

TEST(Subspace, Containment) {
  Subspace plane = span_of({{1, 2, 3}, {0, 1, 1}}, 3);
  EXPECT_TRUE(plane.contains(upsilon::RatVector{1, 3, 4}));
  EXPECT_FALSE(plane.contains(upsilon::RatVector{0, 0, 1}));
  EXPECT_TRUE(plane.contains(span_of({{1, 3, 4}}, 3)));
  EXPECT_TRUE(plane.is_proper());
}

namespace {

oracle::Rows random_rows(upsilon::Rng& rng, std::size_t count, std::size_t r, long height) {
  oracle::Rows rows(count, oracle::Row(r));
  for (auto& row : rows)
    for (auto& x : row) x = Rat(upsilon::uniform_int(rng, -height, height));
  return rows;
}

}  // namespace

TEST(SubspaceProperty, AgreesWithMinorRankOracle) {
  upsilon::Rng rng = upsilon::make_rng(2024, {});
  for (int trial = 0; trial < 300; ++trial) {
    auto r = static_cast<std::size_t>(upsilon::uniform_int(rng, 1, 4));
    auto ka = static_cast<std::size_t>(upsilon::uniform_int(rng, 0, 4));
    auto kb = static_cast<std::size_t>(upsilon::uniform_int(rng, 0, 4));
    long h = upsilon::uniform_int(rng, 1, 2);
    oracle::Rows ra = random_rows(rng, ka, r, h), rb = random_rows(rng, kb, r, h);
    Subspace a = reduce(ra, r), b = reduce(rb, r);
    ASSERT_EQ(a.dim(), oracle::rank(ra, r));
    ASSERT_EQ(upsilon::intersection_dim(a, b), oracle::dim_intersection(ra, rb, r));
    Subspace meet = upsilon::intersect(a, b);
    ASSERT_EQ(meet.dim(), oracle::dim_intersection(ra, rb, r));
    for (const auto& v : meet.basis()) {
      ASSERT_TRUE(oracle::contains(ra, v, r));
      ASSERT_TRUE(oracle::contains(rb, v, r));
    }
    ASSERT_EQ(upsilon::subspace_sum(a, b).dim(), oracle::rank(oracle::concat(ra, rb), r));
    // Canonical form: any other generating set of the same span gives the same basis.
    oracle::Rows shuffled = ra;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto& row : shuffled)
      for (auto& x : row) x *= Rat(3);
    ASSERT_EQ(reduce(shuffled, r), a);
  }
}
