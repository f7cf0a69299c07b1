#include <gtest/gtest.h>

#include <random>

#include "fellap/group.hpp"

using namespace fellap;

TEST(Group, IdentityAndInverseCancellation) {
  const Group f2 = Group::free(2);
  const Elem a = f2.parse("a");
  EXPECT_EQ(f2.mul(f2.id(), a), a);
  EXPECT_EQ(f2.mul(a, f2.inv(a)), f2.id());
  EXPECT_EQ(f2.format(f2.mul(a, f2.parse("A"))), "e");
}

TEST(Group, LatticeAddition) {
  const Group z2 = Group::lattice(2);
  EXPECT_EQ(z2.format(z2.mul(z2.parse("(1,2)"), z2.parse("(3,-1)"))), "(4,1)");
  const Group z = Group::lattice(1);
  EXPECT_EQ(z.format(z.inv(z.parse("5"))), "-5");
}

TEST(Group, FreeInverseReversesWord) {
  const Group f2 = Group::free(2);
  EXPECT_EQ(f2.format(f2.inv(f2.parse("aB"))), "bA");
  EXPECT_EQ(f2.inv(f2.id()), f2.id());
}

TEST(Group, ParseReducesWords) {
  const Group f2 = Group::free(2);
  EXPECT_EQ(f2.format(f2.parse("abBa")), "aa");
  EXPECT_THROW(f2.parse("c"), ContextMismatch);
}

TEST(Group, BallSizes) {
  EXPECT_EQ(Group::free(2).ball(2).size(), 17u);
  const auto zb = Group::lattice(1).ball(3);
  ASSERT_EQ(zb.size(), 7u);
  EXPECT_EQ(Group::symmetric(3).ball(0).size(), 6u);
  EXPECT_EQ(Group::symmetric(3).ball(5).size(), 6u);
  for (int n = 1; n <= 3; ++n)
    for (int r = 0; r <= 5; ++r) {
      EXPECT_EQ(static_cast<long long>(Group::free(n).ball(r).size()), free_ball_size(n, r)) << n << " " << r;
    }
}

TEST(Group, BallClosedFormLargest) {
  // 1 + 6 + 30 + 150 + 750 + 3750 + 18750
  EXPECT_EQ(free_ball_size(3, 6), 23437);
  EXPECT_EQ(static_cast<long long>(Group::free(3).ball(6).size()), 23437);
}

TEST(Group, BallIsNestedAndOrdered) {
  const Group f2 = Group::free(2);
  const auto b2 = f2.ball(2);
  const auto b3 = f2.ball(3);
  for (std::size_t i = 0; i < b2.size(); ++i) EXPECT_EQ(b2[i], b3[i]);
  for (std::size_t i = 1; i < b3.size(); ++i) {
    const int l0 = f2.word_length(b3[i - 1]);
    const int l1 = f2.word_length(b3[i]);
    EXPECT_TRUE(l0 < l1 || (l0 == l1 && b3[i - 1] < b3[i]));
  }
  const Group z2 = Group::lattice(2);
  const auto lb = z2.ball(2);
  EXPECT_EQ(lb.size(), 13u);
  EXPECT_EQ(lb.front(), z2.id());
}

TEST(Group, WordLengthAndPositivity) {
  const Group f2 = Group::free(2);
  EXPECT_EQ(f2.word_length(f2.id()), 0);
  EXPECT_EQ(f2.word_length(f2.parse("aBa")), 3);
  EXPECT_TRUE(f2.is_positive(f2.parse("ab")));
  EXPECT_FALSE(f2.is_positive(f2.parse("aB")));
  EXPECT_FALSE(f2.is_positive(f2.id()));
  EXPECT_THROW(Group::cyclic(3).is_positive(Group::cyclic(3).id()), Unsupported);
}

TEST(Group, MixedContextRejected) {
  const Group z3 = Group::cyclic(3);
  const Group f2 = Group::free(2);
  EXPECT_THROW(z3.mul(z3.id(), f2.parse("a")), ContextMismatch);
  EXPECT_THROW(Group::lattice(2).mul(Group::lattice(2).id(), Group::lattice(3).id()), ContextMismatch);
}

TEST(Group, FiniteTableValidation) {
  EXPECT_THROW(Group::finite({{0, 1}, {1, 1}}), Error);
  EXPECT_THROW(Group::finite({{0, 1}, {0, 1}}), Error);
  EXPECT_NO_THROW(Group::finite({{0, 1}, {1, 0}}));
}

TEST(Group, FiniteAxiomsExhaustive) {
  for (const Group& g : {Group::cyclic(5), Group::symmetric(3), Group::symmetric(4),
                         Group::product(Group::cyclic(2), Group::cyclic(3))}) {
    const auto el = g.elements();
    for (const auto& a : el) {
      EXPECT_EQ(g.mul(g.id(), a), a);
      EXPECT_EQ(g.mul(a, g.id()), a);
      EXPECT_EQ(g.mul(a, g.inv(a)), g.id());
      for (const auto& b : el)
        for (const auto& c : el) ASSERT_EQ(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
    }
  }
}

TEST(Group, SymmetricGroupIsNonAbelian) {
  const Group s3 = Group::symmetric(3);
  bool commutes = true;
  for (const auto& a : s3.elements())
    for (const auto& b : s3.elements()) commutes = commutes && s3.mul(a, b) == s3.mul(b, a);
  EXPECT_FALSE(commutes);
}

TEST(Group, FreeAxiomsRandomized) {
  const Group f2 = Group::free(2);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<int> letter(0, 3);
  auto word = [&] {
    Elem w = f2.id();
    const int n = len(rng);
    for (int i = 0; i < n; ++i) w = f2.mul(w, Elem{{letter(rng)}});
    return w;
  };
  for (int k = 0; k < 500; ++k) {
    const Elem a = word();
    const Elem b = word();
    const Elem c = word();
    EXPECT_TRUE(f2.contains(f2.mul(a, b)));
    EXPECT_EQ(f2.mul(f2.mul(a, b), c), f2.mul(a, f2.mul(b, c)));
    EXPECT_EQ(f2.mul(a, f2.inv(a)), f2.id());
    EXPECT_EQ(f2.inv(f2.inv(a)), a);
    EXPECT_EQ(f2.parse(f2.format(a)), a);
  }
}

TEST(Group, SubgroupCheck) {
  const Group z4 = Group::cyclic(4);
  EXPECT_TRUE(is_subgroup(z4, {z4.element(0), z4.element(2)}));
  EXPECT_FALSE(is_subgroup(z4, {z4.element(0), z4.element(1)}));
  EXPECT_FALSE(is_subgroup(z4, {z4.element(2)}));
}
