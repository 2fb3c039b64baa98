#include <gtest/gtest.h>

#include "test_support.hpp"

namespace bkr {
namespace {

using testing::Rng;

struct TwoBits {
  SpacePtr sp = share(ProductSpace::uniform({2, 2}));
  // A = {x1 = 1}, B = {x2 = 1}
  Event A = Event::from_predicate(sp, [](const Point& x) { return x[0] == 1; });
  Event B = Event::from_predicate(sp, [](const Point& x) { return x[1] == 1; });
  Event AorB = Event::from_predicate(sp, [](const Point& x) { return x[0] == 1 || x[1] == 1; });
};

TEST(Box, DisjointCoordinateEvents) {
  TwoBits t;
  const auto bx = box(t.A, t.B);
  EXPECT_EQ(bx, Event::from_indices(t.sp, {3}));
  EXPECT_DOUBLE_EQ(bx.probability(), 0.25);
  const auto r = bkr_check(t.A, t.B);
  EXPECT_DOUBLE_EQ(r.lhs, 0.25);
  EXPECT_DOUBLE_EQ(r.rhs, 0.25);
  EXPECT_TRUE(r.holds);
}

TEST(Box, UnionWithItself) {
  TwoBits t;
  // Both need a certificate; only (1,1) has two disjoint ones.
  const auto bx = box(t.AorB, t.AorB);
  EXPECT_EQ(bx, Event::from_indices(t.sp, {3}));
  const auto r = bkr_check(t.AorB, t.AorB);
  EXPECT_DOUBLE_EQ(r.lhs, 0.25);
  EXPECT_DOUBLE_EQ(r.rhs, 0.5625);
}

TEST(Box, TrivialEvents) {
  TwoBits t;
  const auto all = Event::all(t.sp);
  const auto none = Event::none(t.sp);
  EXPECT_EQ(box(all, t.A), t.A);
  EXPECT_EQ(box(none, t.A), none);
}

TEST(Diamond, InstanceValues) {
  TwoBits t;
  const auto d = diamond(t.AorB, t.AorB);
  EXPECT_DOUBLE_EQ(d.probability(), 7.0 / 16.0);
  const auto r = kss_check(t.AorB, t.AorB);
  EXPECT_DOUBLE_EQ(r.lhs, 7.0 / 16.0);
  EXPECT_DOUBLE_EQ(r.rhs, 0.75);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(d.space().coords(), 4u);
}

TEST(Box, MatchesOracleAndProperties) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sp = testing::random_space(rng, 1, 3, 1, 3, 0.3);
    const auto A = testing::random_event(rng, sp, 0.6);
    const auto B = testing::random_event(rng, sp, 0.6);
    const auto bx = box(A, B);
    EXPECT_EQ(bx.members(), testing::oracle_box(*sp, A.members(), B.members()));
    EXPECT_EQ(bx, box(A, B, PairEnumeration::all_disjoint));
    EXPECT_EQ(bx, box(B, A));
    EXPECT_TRUE(bx.subset_of(intersection(A, B)));
    const auto maj = essinf_majorant(A, B);
    EXPECT_TRUE(bx.subset_of(maj));
    EXPECT_EQ(maj, essinf_majorant(A, B, PairEnumeration::all_disjoint));
    EXPECT_NEAR(bx.probability(), testing::oracle_mass(*sp, bx.members()), 1e-12);

    // Enlarging A can only enlarge the box.
    auto bigger = A.members();
    bigger[testing::uniform_int(rng, 0, bigger.size() - 1)] = true;
    EXPECT_TRUE(bx.subset_of(box(Event(sp, bigger), B)));
  }
}

TEST(EssinfMajorant, EqualsBoxUnderFullSupport) {
  Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sp = testing::random_space(rng, 1, 3, 1, 3, 0.0);
    const auto A = testing::random_event(rng, sp, 0.7);
    const auto B = testing::random_event(rng, sp, 0.7);
    EXPECT_EQ(box(A, B), essinf_majorant(A, B));
  }
}

TEST(EssinfMajorant, StrictGapOnNullLabel) {
  // Label 2 of the second coordinate is null. Both events exclude it, so
  // the box needs coordinate 1 twice and is empty, while the ess-inf
  // certificates may ignore the null label.
  const auto sp = share(ProductSpace({2, 3}, {}, {{0.5, 0.5}, {0.5, 0.5, 0.0}}));
  const auto A = Event::from_predicate(sp, [](const Point& x) { return x[0] == 1 && x[1] != 2; });
  const auto B = Event::from_predicate(sp, [](const Point& x) { return x[1] != 2; });
  const auto bx = box(A, B);
  const auto maj = essinf_majorant(A, B);
  EXPECT_TRUE(bx.subset_of(maj));
  EXPECT_GT(maj.count(), bx.count());
  EXPECT_DOUBLE_EQ(maj.probability(), 0.5);
  EXPECT_DOUBLE_EQ(bx.probability(), 0.0);
}

TEST(Diamond, MatchesOracleAndProperties) {
  Rng rng(103);
  for (int trial = 0; trial < 80; ++trial) {
    const auto sp = testing::random_space(rng, 1, 3, 1, 2, 0.3);
    const auto A = testing::random_event(rng, sp, 0.6);
    const auto B = testing::random_event(rng, sp, 0.6);
    const auto d = diamond(A, B);
    EXPECT_EQ(d.members(), testing::oracle_diamond(*sp, A.members(), B.members()));
    EXPECT_EQ(d, diamond(A, B, PairEnumeration::all_disjoint));
    // Diagonal of the diamond is the box.
    const std::size_t N = sp->point_count();
    const auto bx = box(A, B);
    for (std::size_t x = 0; x < N; ++x) EXPECT_EQ(d.contains(x * N + x), bx.contains(x));
  }
}

TEST(Inequalities, BkrAndKssOnRandomInstances) {
  Rng rng(104);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto sp = testing::random_space(rng, 1, 3, 1, 3, 0.2);
    const bool monotone = trial % 2 == 0;
    const auto A = monotone ? testing::random_up_set(rng, sp) : testing::random_event(rng, sp);
    const auto B = monotone ? testing::random_up_set(rng, sp) : testing::random_event(rng, sp);
    const auto r = bkr_check(A, B);
    EXPECT_TRUE(r.holds) << r.lhs << " > " << r.rhs;
    EXPECT_NEAR(r.slack, r.rhs - r.lhs, 0.0);
    if (sp->point_count() <= 27) {
      const auto k = kss_check(A, B);
      EXPECT_TRUE(k.holds) << k.lhs << " > " << k.rhs;
    }
  }
}

TEST(Event, Validation) {
  const auto sp = share(ProductSpace::uniform({2, 2}));
  EXPECT_THROW(Event(sp, std::vector<bool>(3)), InvalidInput);
  EXPECT_THROW(Event::from_indices(sp, {4}), InvalidInput);
  const auto other = share(ProductSpace::uniform({2, 3}));
  EXPECT_THROW(box(Event::all(sp), Event::all(other)), InvalidInput);
}

}  // namespace
}  // namespace bkr
