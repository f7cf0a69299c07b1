// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "fellap/fellap.hpp"

using namespace fellap;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& run) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  char time[32];
  std::snprintf(time, sizeof time, "%.1fs", seconds_since(t0));
  std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << " [" << time << "]"
            << std::endl;
  if (!o.pass) ++failures;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<Group> small_groups() {
  std::vector<Group> gs;
  for (int m = 2; m <= 6; ++m) gs.push_back(Group::cyclic(m));
  gs.push_back(Group::symmetric(3));
  gs.push_back(Group::free(2));
  return gs;
}

// 1. Fell axioms on random semidirect and twisted bundles.
Outcome fell_axioms() {
  Rng rng(101);
  const auto gs = small_groups();
  double worst = 0.0;
  std::string where;
  int bad = 0;
  const auto t0 = Clock::now();
  for (int n = 0; n < 1000; ++n) {
    const Group& g = gs[static_cast<std::size_t>(n) % gs.size()];
    const bool twisted = (n / static_cast<int>(gs.size())) % 2 == 1;
    FellBundle b = [&] {
      if (!twisted) return FellBundle(std::make_shared<SemidirectModel>(random_partial_action(g, rng)));
      auto [gamma, omega] = random_twisted(g, rng);
      return FellBundle(std::make_shared<TwistedModel>(gamma, omega));
    }();
    const Report rep = validate_bundle(b, 2, 50, rng(), 1e-10);
    if (!rep.ok()) ++bad;
    if (rep.max_residual() > worst) {
      worst = rep.max_residual();
      where = b.describe();
    }
  }
  const double elapsed = seconds_since(t0);
  return {bad == 0 && worst <= 1e-10 && elapsed <= 60.0,
          "1000 bundles x 50 triples, " + std::to_string(bad) + " failing, max residual " + sci(worst) + " (" + where + "), " +
              sci(elapsed) + "s of 60s"};
}

// 2. Globalization round trip and orbit span.
Outcome globalization() {
  Rng rng(202);
  std::vector<Group> gs;
  for (int m = 2; m <= 6; ++m) gs.push_back(Group::cyclic(m));
  gs.push_back(Group::symmetric(3));
  double unitary = 0.0, unit = 0.0;
  int block_mismatch = 0, span_fail = 0;
  for (int n = 0; n < 200; ++n) {
    const Group& g = gs[static_cast<std::size_t>(n) % gs.size()];
    const CPartialAction pa = random_partial_action(g, rng);
    const Globalization glob = globalize_finite(pa);
    const CPartialAction back = restrict(glob.action(), glob.image());
    for (const auto& t : g.elements()) {
      const IdealIso& x = back.iso(t);
      const IdealIso& y = pa.iso(t);
      if (x.source.blocks != y.source.blocks || x.image != y.image) {
        ++block_mismatch;
        continue;
      }
      for (std::size_t k = 0; k < x.unitaries.size(); ++k)
        unitary = std::max(unitary, phase_distance(x.unitaries[k], y.unitaries[k]));
    }
    if (!glob.orbit_span_check().equal()) ++span_fail;
    // gamma_t(1_{t^-1} 1_s) = 1_t 1_{ts} over all pairs, from the unit elements.
    const FdAlgebra& a = pa.algebra();
    for (const auto& t : g.elements())
      for (const auto& s : g.elements()) {
        const FdElement lhs = pa.apply(t, pa.domain(g.inv(t)).unit(a) * pa.domain(s).unit(a));
        const FdElement rhs = pa.domain(t).unit(a) * pa.domain(g.mul(t, s)).unit(a);
        unit = std::max(unit, distance(lhs, rhs));
      }
  }
  return {block_mismatch == 0 && unitary <= 1e-10 && span_fail == 0 && unit <= 1e-10,
          "200 actions, block mismatches " + std::to_string(block_mismatch) + ", unitary residual " + sci(unitary) +
              ", span failures " + std::to_string(span_fail) + ", unit identity over all pairs " + sci(unit)};
}

// 3. Central partial action is the center restriction.
Outcome central() {
  Rng rng(303);
  const auto gs = small_groups();
  double dist = 0.0, unit = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Group& g = gs[static_cast<std::size_t>(n) % gs.size()];
    const CPartialAction pa = random_partial_action(g, rng);
    const FellBundle b = FellBundle(std::make_shared<SemidirectModel>(pa));
    const auto w = window_elements(g, 2);
    const CPartialAction sigma = central_partial_action(b, 2);
    dist = std::max(dist, action_distance(sigma, center_restriction(pa), w));
    const FdAlgebra& z = sigma.algebra();
    for (const auto& t : w)
      for (const auto& s : w) {
        const FdElement lhs = sigma.apply(t, sigma.domain(g.inv(t)).unit(z) * sigma.domain(s).unit(z));
        const FdElement rhs = sigma.domain(t).unit(z) * sigma.domain(g.mul(t, s)).unit(z);
        unit = std::max(unit, distance(lhs, rhs));
      }
  }
  return {dist == 0.0 && unit <= 1e-10,
          "200 bundles, distance to center restriction " + sci(dist) + ", unit identity " + sci(unit)};
}

// 4. Kernel algebra laws and window monotonicity.
Outcome kernels() {
  Rng rng(404);
  struct Fixture {
    FellBundle b;
    WindowF f;
    WindowF inner;
  };
  std::vector<Fixture> fx;
  {
    const Group f2 = Group::free(2);
    const FellBundle b(std::make_shared<SemidirectModel>(random_partial_action(f2, rng)));
    // |F| = 12: ball(1) plus seven words of length 2.
    std::vector<Elem> el = f2.ball(1);
    for (const char* w : {"aa", "ab", "aB", "ba", "bb", "bA", "AA"}) el.push_back(f2.parse(w));
    fx.push_back({b, WindowF(f2, el), WindowF::ball(f2, 1)});
  }
  {
    const Group s3 = Group::symmetric(3);
    auto [gamma, omega] = random_twisted(s3, rng);
    const FellBundle b(std::make_shared<TwistedModel>(gamma, omega));
    fx.push_back({b, WindowF(s3, s3.elements()), WindowF(s3, {s3.element(0), s3.element(1), s3.element(3)})});
  }
  {
    const Group z = Group::lattice(1);
    const FellBundle b = make_group_bundle(z, FdAlgebra({2, 1}));
    fx.push_back({b, WindowF::ball(z, 5), WindowF::ball(z, 2)});
  }
  {
    const Group z6 = Group::cyclic(6);
    const FellBundle b(std::make_shared<SemidirectModel>(random_partial_action(z6, rng)));
    fx.push_back({b, WindowF(z6, z6.elements()), WindowF(z6, {z6.element(0), z6.element(2), z6.element(5)})});
  }
  double act = 0.0, hom = 0.0, star = 0.0, pi = 0.0, rank1 = 0.0, mono = 0.0;
  for (int n = 0; n < 500; ++n) {
    const Fixture& x = fx[static_cast<std::size_t>(n) % fx.size()];
    const FellBundle& b = x.b;
    const Group& g = b.group();
    const auto& el = x.f.elements();
    std::uniform_int_distribution<std::size_t> pick(0, el.size() - 1);
    const Kernel h = random_kernel(b, x.f, rng);
    const Kernel k = random_kernel(b, x.f, rng);
    const Elem s = el[pick(rng)];
    const Elem t = el[pick(rng)];
    act = std::max(act, kernel_distance(beta_act(s, beta_act(t, k)), beta_act(g.mul(s, t), k)));
    hom = std::max(hom, kernel_distance(beta_act(t, k_mul(h, k)), k_mul(beta_act(t, h), beta_act(t, k))));
    star = std::max(star, kernel_distance(beta_act(t, k_star(k)), k_star(beta_act(t, k))));
    const FellSection v = random_section(b, el, rng);
    pi = std::max(pi, section_distance(kernel_apply(k_mul(h, k), v), kernel_apply(k, kernel_apply(h, v))));
    const FellSection xi = random_section(b, el, rng), eta = random_section(b, el, rng);
    const FellSection mu = random_section(b, el, rng), nu = random_section(b, el, rng);
    rank1 = std::max(rank1, kernel_distance(k_mul(rank_one(mu, nu), rank_one(xi, eta)),
                                            rank_one(right_mul(xi, l2_inner(eta, mu)), nu)));
    if (n % 5 == 0) {
      // The compression to a smaller window never has larger norm.
      mono = std::max(mono, MF_embed_norm(k, x.inner) - MF_embed_norm(k, x.f));
    }
  }
  const double worst = std::max({act, hom, star, pi, rank1});
  return {worst <= 1e-10 && mono <= 1e-10,
          "500 kernels, |F| <= 12: beta action " + sci(act) + ", beta hom " + sci(hom) + ", beta star " + sci(star) +
              ", pi reversal " + sci(pi) + ", rank-one " + sci(rank1) + ", window monotonicity excess " + sci(mono)};
}

// 5. Exact AP values for uniform and Folner witnesses.
Outcome ap_exact() {
  Rng rng(505);
  double uniform = 0.0;
  for (const Group& g : {Group::cyclic(2), Group::cyclic(3), Group::cyclic(5), Group::cyclic(6), Group::symmetric(3)})
    for (int k = 0; k < 4; ++k) {
      FellBundle b = [&] {
        if (k % 2 == 0) return FellBundle(std::make_shared<SemidirectModel>(random_partial_action(g, rng)));
        auto [gamma, omega] = random_twisted(g, rng);
        return FellBundle(std::make_shared<TwistedModel>(gamma, omega));
      }();
      const APWitness u = uniform_witness(g, b.unit_algebra());
      for (const auto& tg : basis_targets(b, 0)) uniform = std::max(uniform, ap_defect(b, u, tg.t, tg.b));
    }
  const Group z = Group::lattice(1);
  const FellBundle bz(std::make_shared<SemidirectModel>(random_action(z, rng)));
  double folner = 0.0;
  for (int n = 1; n <= 64; ++n) {
    const APWitness w = folner_witness(z, bz.unit_algebra(), n);
    for (int t = -n; t <= n; ++t) {
      const Elem te = z.lattice_point({t});
      const Vector x = random_vector(rng, bz.dim(te));
      const double expect = static_cast<double>(std::abs(t)) / n * fiber_norm(bz, te, x);
      folner = std::max(folner, std::abs(ap_defect(bz, w, te, x) - expect));
    }
  }
  return {uniform <= 1e-12 && folner <= 1e-12,
          "uniform max defect " + sci(uniform) + ", Folner max |defect - |t|/N ||b||| " + sci(folner) + " (N <= 64)"};
}

std::vector<Word> words_of_length(int n, int len) {
  std::vector<Word> out{Word{}};
  for (int k = 0; k < len; ++k) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (int c = 0; c < n; ++c) {
        next.push_back(w);
        next.back().push_back(c);
      }
    out = std::move(next);
  }
  return out;
}

// Dense evaluation of the defect with full value tables over every positive word.
double brute_defect(int i, int n, const Elem& g) {
  const Group fn = Group::free(n);
  const PartialSymbol sym(fn, g);
  const Complex c(1.0 / std::sqrt(static_cast<double>(i)), 0.0);
  CylFun sum(n, 0);
  for (int len = 1; len <= i; ++len)
    for (const auto& h : words_of_length(n, len)) {
      const Elem rest = fn.mul(fn.inv(g), word_elem(fn, h));
      if (!fn.is_positive(rest) || fn.word_length(rest) > i) continue;
      sum = sum + cyl_star(cyl_scale(CylFun::indicator(n, h), c)) *
                      theta_apply(sym, sym.source_unit() * cyl_scale(CylFun::indicator(n, positive_word(rest)), c));
    }
  return sup_norm(sym.range_unit() - sum);
}

// 6. Cuntz defect law.
Outcome cuntz() {
  const auto t0 = Clock::now();
  double law = 0.0, brute = 0.0, bound = 0.0;
  int cases = 0;
  for (int n = 2; n <= 3; ++n) {
    const Group fn = Group::free(n);
    std::vector<Elem> targets;
    for (int len = 1; len <= 2; ++len)
      for (const auto& w : words_of_length(n, len)) targets.push_back(word_elem(fn, w));
    for (int i = 1; i <= 10; ++i) {
      const CuntzWitness xi = xi_witness(i, n);
      bound = std::max(bound, std::abs(witness_bound(xi) - 1.0));
      for (const auto& g : targets) {
        const int len = fn.word_length(g);
        if (i < std::max(1, len)) continue;
        const double d = cuntz_ap_defect(xi, g);
        law = std::max(law, std::abs(d - static_cast<double>(len) / i));
        if (i <= 4) brute = std::max(brute, std::abs(d - brute_defect(i, n, g)));
        ++cases;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {law <= 1e-12 && brute <= 1e-12 && bound <= 1e-12 && elapsed <= 120.0,
          std::to_string(cases) + " cases: |defect - |g|/i| " + sci(law) + ", brute force " + sci(brute) +
              ", |bound - 1| " + sci(bound) + ", " + sci(elapsed) + "s of 120s"};
}

// 7. Convexifier on random witness lists over F_2.
Outcome convexifier() {
  Rng rng(707);
  const Group f2 = Group::free(2);
  const auto pool = f2.ball(1);
  double identities = 0.0, bound_excess = 0.0;
  int overlaps = 0, outside = 0;
  for (int n = 0; n < 100; ++n) {
    const FellBundle b(std::make_shared<SemidirectModel>(random_partial_action(f2, rng)));
    const int m = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<std::pair<APWitness, double>> ws;
    std::vector<double> raw;
    for (int k = 0; k < m; ++k) raw.push_back(std::uniform_real_distribution<double>(0.05, 1.0)(rng));
    double total = 0.0;
    for (double r : raw) total += r;
    const double scale = std::uniform_real_distribution<double>(0.5, 1.0)(rng) / total;
    double max_in = 0.0;
    for (int k = 0; k < m; ++k) {
      APWitness a(b);
      std::bernoulli_distribution keep(0.6);
      for (const auto& r : pool)
        if (keep(rng)) a.set(r, FdElement::random(b.unit_algebra(), rng));
      if (a.values().empty()) a.set(f2.id(), FdElement::random(b.unit_algebra(), rng));
      max_in = std::max(max_in, witness_bound(a));
      ws.push_back({a, raw[static_cast<std::size_t>(k)] * scale});
    }
    const auto targets = basis_targets(b, 1);
    const auto [out, cert] = convexify(b, ws, targets, 6);
    identities = std::max(identities, cert.max_residual());
    bound_excess = std::max(bound_excess, witness_bound(out) - max_in);
    // Disjointness of F' r_k, recomputed from the witnesses.
    std::set<Elem> fprime;
    for (const auto& [a, l] : ws)
      for (const auto& r : a.support()) {
        fprime.insert(r);
        for (const auto& tg : targets) fprime.insert(f2.mul(f2.inv(tg.t), r));
      }
    std::set<Elem> seen;
    for (const auto& r : cert.translates) {
      if (f2.word_length(r) > 6) ++outside;
      for (const auto& x : fprime)
        if (!seen.insert(f2.mul(x, r)).second) ++overlaps;
    }
  }
  return {identities <= 1e-12 && bound_excess <= 1e-12 && overlaps == 0 && outside == 0,
          "100 lists: identity residual " + sci(identities) + ", bound excess " + sci(bound_excess) + ", overlaps " +
              std::to_string(overlaps) + ", translates outside ball(6) " + std::to_string(outside)};
}

// 8. Conditional expectation P_F on three sub-bundle fixtures.
Outcome expectation() {
  Rng rng(808);
  const FellBundle z4 = make_group_bundle(Group::cyclic(4), FdAlgebra({1, 1}));
  const FellBundle s3 = make_group_bundle(Group::symmetric(3), FdAlgebra({2}));
  const FellBundle semi(std::make_shared<SemidirectModel>(random_partial_action(Group::symmetric(3), rng)));
  const Group& g4 = z4.group();
  const std::vector<FiberExpectation> fixtures{
      FiberExpectation::subgroup(z4, {g4.element(0), g4.element(2)}),
      FiberExpectation::block_diagonal(s3, [&](const Elem&) { return Ideal::whole(s3.unit_algebra()); }),
      FiberExpectation::subgroup(semi, {semi.group().id()}),
  };
  double idem = 0.0, bimodule = 0.0, contraction = 0.0;
  for (int n = 0; n < 200; ++n) {
    const FiberExpectation& p = fixtures[static_cast<std::size_t>(n) % fixtures.size()];
    const FellBundle& b = p.bundle();
    const WindowF f(b.group(), b.group().elements());
    const Kernel k = random_kernel(b, f, rng);
    const Kernel pk = cond_expectation_PF(p, k, f);
    idem = std::max(idem, kernel_distance(cond_expectation_PF(p, pk, f), pk));
    const Kernel a = cond_expectation_PF(p, random_kernel(b, f, rng), f);
    const Kernel c = cond_expectation_PF(p, random_kernel(b, f, rng), f);
    bimodule = std::max(bimodule, kernel_distance(cond_expectation_PF(p, k_mul(k_mul(a, k), c), f),
                                                  k_mul(k_mul(a, pk), c)));
    contraction = std::max(contraction, MF_embed_norm(pk, f) - MF_embed_norm(k, f));
  }
  return {idem == 0.0 && bimodule <= 1e-10 && contraction <= 1e-8,
          "200 kernels: idempotence " + sci(idem) + ", bimodule " + sci(bimodule) + ", norm excess " +
              sci(contraction)};
}

// 9. Partial-action defect against the semidirect bundle.
Outcome cross_module() {
  Rng rng(909);
  const auto gs = small_groups();
  double worst = 0.0;
  for (int n = 0; n < 300; ++n) {
    const Group& g = gs[static_cast<std::size_t>(n) % gs.size()];
    const CPartialAction pa = random_partial_action(g, rng);
    const FellBundle b(std::make_shared<SemidirectModel>(pa));
    const auto pool = window_elements(g, 1);
    APWitness w(g, pa.algebra());
    std::bernoulli_distribution keep(0.6);
    for (const auto& r : pool)
      if (keep(rng)) w.set(r, FdElement::random(pa.algebra(), rng));
    const Elem t = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const FdElement x = pa.domain(t).cut(FdElement::random(pa.algebra(), rng));
    const Vector coords = ideal_coords(pa.algebra(), pa.domain(t), x);
    worst = std::max(worst, std::abs(ap_defect_partial(pa, w, t, x) - ap_defect(b, w, t, coords)));
  }
  return {worst <= 1e-10, "300 instances, max difference " + sci(worst)};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Repeated CLI runs give identical bytes.
Outcome determinism() {
  const std::string cli = FELLAP_CLI_PATH;
  const std::string samples = FELLAP_SAMPLES_DIR;
  const std::string semi = " --config " + samples + "/semidirect.json";
  const std::string lat = " --config " + samples + "/lattice.json";
  const std::vector<std::string> commands{
      semi + " --seed 11 validate --target s3_twisted --radius 1",
      semi + " --seed 11 validate --target f2_bundle --radius 2",
      semi + " globalize --action s3_random",
      semi + " --seed 4 kernels --bundle s3_twisted --window 1 --samples 3",
      lat + " --seed 4 kernels --bundle z_m2 --window 2 --samples 3",
      lat + " ap-check --bundle z_group --witness z_folner --targets '1;-2'",
      semi + " ap-check --bundle s3_m2 --witness builtin:uniform",
      " cuntz-ap --n 3 --imax 5 --targets a,ab,cc",
      " groupoid --n 2 --depth 3 --radius 2",
  };
  int differing = 0, empty = 0;
  const std::string base = "fellap_acceptance_" + std::to_string(::getpid());
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::string outs[2];
    for (int run = 0; run < 2; ++run) {
      const std::string path = base + "_" + std::to_string(c) + "_" + std::to_string(run) + ".csv";
      const std::string line = "\"" + cli + "\"" + commands[c] + " --out " + path + " 2>/dev/null";
      std::system(line.c_str());
      outs[run] = slurp(path);
      std::remove(path.c_str());
    }
    if (outs[0].empty()) ++empty;
    if (outs[0] != outs[1]) ++differing;
  }
  return {differing == 0 && empty == 0, std::to_string(commands.size()) + " commands run twice, " +
                                            std::to_string(differing) + " differing, " + std::to_string(empty) +
                                            " empty"};
}

}  // namespace

int main() {
  report(1, "Fell-axiom suite", fell_axioms);
  report(2, "globalization round trip", globalization);
  report(3, "central partial action", central);
  report(4, "kernel algebra", kernels);
  report(5, "AP exact values", ap_exact);
  report(6, "Cuntz defect law", cuntz);
  report(7, "convexifier contract", convexifier);
  report(8, "conditional expectation P_F", expectation);
  report(9, "partial-action defect oracle", cross_module);
  report(10, "CLI determinism", determinism);
  return failures == 0 ? 0 : 1;
}
