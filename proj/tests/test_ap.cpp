#include <gtest/gtest.h>

#include "fellap/ap.hpp"
#include "fellap/random.hpp"

using namespace fellap;

namespace {

APWitness random_witness(const Group& g, const FdAlgebra& a, const std::vector<Elem>& pool, Rng& rng) {
  APWitness w(g, a);
  std::bernoulli_distribution keep(0.6);
  for (const auto& r : pool)
    if (keep(rng)) w.set(r, FdElement::random(a, rng));
  if (w.values().empty()) w.set(pool.front(), FdElement::random(a, rng));
  return w;
}

// |F n t^-1 F| for F the box {0..N-1}^d, counted point by point.
int box_overlap(int n, const std::vector<int>& t) {
  const int d = static_cast<int>(t.size());
  int count = 0;
  std::vector<int> c(d, 0);
  while (true) {
    bool inside = true;
    for (int i = 0; i < d; ++i) inside = inside && c[i] + t[i] >= 0 && c[i] + t[i] < n;
    count += inside;
    int i = 0;
    while (i < d && ++c[i] == n) c[i++] = 0;
    if (i == d) break;
  }
  return count;
}

}  // namespace

TEST(AP, ZeroWitness) {
  Rng rng(1);
  const FellBundle b = make_group_bundle(Group::cyclic(3), FdAlgebra({2}));
  const APWitness zero(b);
  EXPECT_EQ(witness_bound(zero), 0.0);
  const Elem t = b.group().element(1);
  const Vector x = random_vector(rng, 4);
  EXPECT_NEAR(ap_defect(b, zero, t, x), fiber_norm(b, t, x), 1e-14);
}

TEST(AP, UniformWitnessOnFiniteGroups) {
  Rng rng(2);
  for (const Group& g : {Group::symmetric(3), Group::cyclic(5)}) {
    const FellBundle b = make_semidirect(random_partial_action(g, rng));
    const APWitness u = uniform_witness(g, b.unit_algebra());
    EXPECT_NEAR(witness_bound(u), 1.0, 1e-14);
    for (const auto& tg : basis_targets(b, 0)) EXPECT_LE(ap_defect(b, u, tg.t, tg.b), 1e-12) << tg.label;
  }
  EXPECT_THROW(uniform_witness(Group::lattice(1), FdAlgebra({1})), Unsupported);
}

TEST(AP, FolnerOnZ) {
  Rng rng(3);
  const Group z = Group::lattice(1);
  const FellBundle b = make_semidirect(random_action(z, rng));
  const APWitness w = folner_witness(z, b.unit_algebra(), 10);
  EXPECT_EQ(w.values().size(), 10u);
  EXPECT_NEAR(witness_bound(w), 1.0, 1e-14);
  const Elem one = z.parse("1");
  const Vector x = random_vector(rng, b.dim(one));
  EXPECT_NEAR(ap_defect(b, w, one, x), 0.1 * fiber_norm(b, one, x), 1e-12);
  EXPECT_THROW(folner_witness(Group::free(2), FdAlgebra({1}), 3), Unsupported);
}

TEST(AP, FolnerClosedFormOnLattices) {
  Rng rng(4);
  for (int d : {1, 2}) {
    const Group g = Group::lattice(d);
    const FellBundle b = make_semidirect(random_action(g, rng));
    for (int n : {1, 3, 4}) {
      const APWitness w = folner_witness(g, b.unit_algebra(), n);
      const int size = static_cast<int>(w.values().size());
      for (const auto& t : g.ball(3)) {
        const Vector x = random_vector(rng, b.dim(t));
        const double expect = (1.0 - static_cast<double>(box_overlap(n, t.code)) / size) * fiber_norm(b, t, x);
        EXPECT_NEAR(ap_defect(b, w, t, x), expect, 1e-12) << g.format(t) << " N=" << n;
      }
    }
  }
  const Group z2 = Group::lattice(2);
  const FellBundle b = make_group_bundle(z2, FdAlgebra({1}));
  const Elem t = z2.parse("(1,0)");
  EXPECT_NEAR(ap_defect(b, folner_witness(z2, FdAlgebra({1}), 4), t, Vector::Ones(1)), 0.25, 1e-12);
}

TEST(AP, PartialDefectMatchesSemidirect) {
  Rng rng(5);
  for (const Group& g : {Group::cyclic(4), Group::symmetric(3), Group::free(2)}) {
    for (int n = 0; n < 10; ++n) {
      const CPartialAction pa = random_partial_action(g, rng);
      const FellBundle b = make_semidirect(pa);
      const auto pool = window_elements(g, 1);
      const APWitness w = random_witness(g, pa.algebra(), pool, rng);
      for (const auto& t : pool) {
        const FdElement x = pa.domain(t).cut(FdElement::random(pa.algebra(), rng));
        const Vector coords = ideal_coords(pa.algebra(), pa.domain(t), x);
        EXPECT_NEAR(ap_defect_partial(pa, w, t, x), ap_defect(b, w, t, coords), 1e-10) << g.name();
      }
    }
  }
}

TEST(AP, PartialDefectEdgeCases) {
  Rng rng(6);
  const Group z3 = Group::cyclic(3);
  const FdAlgebra a({2, 1});
  const CPartialAction id = CPartialAction::identity_action(z3, a);
  APWitness delta(z3, a);
  delta.set(z3.id(), FdElement::unit(a));
  EXPECT_LT(ap_defect_partial(id, delta, z3.id(), FdElement::random(a, rng)), 1e-14);

  const CPartialAction triv = CPartialAction::trivial(z3);
  APWitness one(z3, FdAlgebra({1}));
  one.set(z3.id(), FdElement::unit(FdAlgebra({1})));
  const FellBundle b = make_semidirect(triv);
  const auto targets = basis_targets(b, 0);
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(ap_defect(b, one, targets[0].t, targets[0].b), 0.0);
  EXPECT_THROW(ap_defect_partial(triv, one, z3.element(1), FdElement::unit(FdAlgebra({1}))), DomainViolation);
}

TEST(AP, ConvexifySingleWitnessIsATranslate) {
  Rng rng(7);
  const Group f2 = Group::free(2);
  const FellBundle b = make_semidirect(random_partial_action(f2, rng));
  const APWitness a = random_witness(f2, b.unit_algebra(), f2.ball(1), rng);
  const auto targets = basis_targets(b, 1);
  const auto [out, cert] = convexify(b, {{a, 1.0}}, targets, 3);
  ASSERT_EQ(cert.translates.size(), 1u);
  EXPECT_EQ(cert.translates[0], f2.id());
  for (const auto& tg : targets) EXPECT_NEAR(ap_defect(b, out, tg.t, tg.b), ap_defect(b, a, tg.t, tg.b), 1e-12);
}

TEST(AP, ConvexifyTwoWitnessesOnF2) {
  Rng rng(8);
  const Group f2 = Group::free(2);
  const FellBundle b = make_semidirect(random_partial_action(f2, rng));
  const APWitness a1 = random_witness(f2, b.unit_algebra(), f2.ball(1), rng);
  const APWitness a2 = random_witness(f2, b.unit_algebra(), f2.ball(1), rng);
  const std::vector<APTarget> at_e = {{f2.id(), Vector::Unit(b.dim(f2.id()), 0), "e#0"}};
  const auto [out, cert] = convexify(b, {{a1, 0.5}, {a2, 0.5}}, at_e, 3);
  ASSERT_EQ(cert.translates.size(), 2u);
  EXPECT_LE(f2.word_length(cert.translates[1]), 3);
  EXPECT_LE(cert.max_residual(), 1e-12);
  EXPECT_LE(witness_bound(out), std::max(witness_bound(a1), witness_bound(a2)) + 1e-12);

  const auto targets = basis_targets(b, 1);
  const auto [out6, cert6] = convexify(b, {{a1, 0.5}, {a2, 0.5}}, targets, 6);
  EXPECT_LE(cert6.max_residual(), 1e-12);
  // With weights summing to 1 the defect is at most the weighted average.
  for (const auto& tg : targets)
    EXPECT_LE(ap_defect(b, out6, tg.t, tg.b),
              0.5 * ap_defect(b, a1, tg.t, tg.b) + 0.5 * ap_defect(b, a2, tg.t, tg.b) + 1e-12);
}

TEST(AP, ConvexifyTranslatesAreDisjoint) {
  Rng rng(9);
  const Group f2 = Group::free(2);
  const FellBundle b = make_group_bundle(f2, FdAlgebra({1}));
  std::vector<std::pair<APWitness, double>> ws;
  for (int k = 0; k < 4; ++k) ws.push_back({random_witness(f2, b.unit_algebra(), f2.ball(1), rng), 0.25});
  const auto targets = basis_targets(b, 1);
  const auto [out, cert] = convexify(b, ws, targets, 6);
  std::set<Elem> fprime;
  for (const auto& [a, l] : ws)
    for (const auto& r : a.support()) {
      fprime.insert(r);
      for (const auto& tg : targets) fprime.insert(f2.mul(f2.inv(tg.t), r));
    }
  std::set<Elem> seen;
  for (const auto& r : cert.translates)
    for (const auto& x : fprime) EXPECT_TRUE(seen.insert(f2.mul(x, r)).second);
}

TEST(AP, ConvexifyErrors) {
  Rng rng(10);
  const Group f2 = Group::free(2);
  const FellBundle b = make_group_bundle(f2, FdAlgebra({1}));
  const APWitness a = random_witness(f2, b.unit_algebra(), f2.ball(1), rng);
  EXPECT_THROW(convexify(b, {{a, 0.5}, {a, 0.5}}, basis_targets(b, 1), 1), SearchExhausted);
  EXPECT_THROW(convexify(b, {{a, 0.7}, {a, 0.7}}, {}, 6), Error);
  const FellBundle fin = make_group_bundle(Group::cyclic(3), FdAlgebra({1}));
  EXPECT_THROW(convexify(fin, {{uniform_witness(fin.group(), FdAlgebra({1})), 1.0}}, {}, 3), Unsupported);
}

TEST(AP, Certify) {
  const Group s3 = Group::symmetric(3);
  const FellBundle b = make_group_bundle(s3, FdAlgebra({2}));
  const auto targets = basis_targets(b, 0);
  const APVerdict good = ap_certify(b, {uniform_witness(s3, b.unit_algebra())}, targets, 1e-12, 1.0 + 1e-12);
  EXPECT_TRUE(good.pass());
  for (const auto& row : good.rows) EXPECT_LE(row.defect, 1e-12);

  const APVerdict bad = ap_certify(b, {APWitness(b), APWitness(b)}, targets, 1e-3);
  EXPECT_FALSE(bad.pass());
  EXPECT_EQ(bad.failing.size(), targets.size());
  for (const auto& row : bad.rows) EXPECT_NEAR(row.defect, 1.0, 1e-12);

  const Group z = Group::lattice(1);
  const FellBundle bz = make_group_bundle(z, FdAlgebra({1}));
  std::vector<APWitness> family;
  for (int n = 1; n <= 8; ++n) family.push_back(folner_witness(z, FdAlgebra({1}), n));
  const std::vector<APTarget> shift = {{z.parse("1"), Vector::Ones(1), "1#0"}};
  const APVerdict trace = ap_certify(bz, family, shift, 0.2);
  ASSERT_EQ(trace.rows.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(trace.rows[i].defect, 1.0 / static_cast<double>(i + 1), 1e-12);
  EXPECT_TRUE(trace.pass());
}

TEST(AP, FitWeightsPrefersTheGoodWitness) {
  const Group s3 = Group::symmetric(3);
  const FellBundle b = make_group_bundle(s3, FdAlgebra({1}));
  const std::vector<APWitness> ws = {APWitness(b), uniform_witness(s3, b.unit_algebra())};
  const auto lambda = fit_weights(b, ws, basis_targets(b, 0));
  ASSERT_EQ(lambda.size(), 2u);
  EXPECT_GE(lambda[0], 0.0);
  EXPECT_NEAR(lambda[1], 1.0, 1e-6);
  EXPECT_LE(lambda[0] + lambda[1], 1.0 + 1e-12);
}
