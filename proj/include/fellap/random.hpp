#pragma once

// Seeded generators of algebras, actions and twists for property tests and
// the CLI's randomized checks.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <vector>

#include "fellap/fdalg.hpp"
#include "fellap/fellbundle.hpp"

namespace fellap {

/// Block dimensions drawn from 1..max_dim, between 1 and max_blocks blocks.
inline FdAlgebra random_algebra(Rng& rng, int max_blocks = 3, int max_dim = 2) {
  std::uniform_int_distribution<int> count(1, max_blocks);
  std::uniform_int_distribution<int> dim(1, max_dim);
  std::vector<int> blocks(count(rng));
  for (int& d : blocks) d = dim(rng);
  return FdAlgebra(std::move(blocks));
}

/// Random nonempty ideal (each block kept with probability 1/2).
inline Ideal random_ideal(const FdAlgebra& a, Rng& rng) {
  std::bernoulli_distribution keep(0.5);
  std::vector<int> b;
  for (int j = 0; j < a.block_count(); ++j)
    if (keep(rng)) b.push_back(j);
  if (b.empty()) b.push_back(std::uniform_int_distribution<int>(0, a.block_count() - 1)(rng));
  return Ideal(std::move(b));
}

namespace detail {

/// Cyclic subgroup generated by g: powers g^0 .. g^{q-1}.
inline std::vector<Elem> powers(const Group& grp, const Elem& g) {
  std::vector<Elem> out{grp.id()};
  Elem x = g;
  while (x != grp.id()) {
    out.push_back(x);
    x = grp.mul(x, g);
  }
  return out;
}

}  // namespace detail

/// Global action of a finite group on a random algebra: the blocks are the
/// points of a G-set  G/<g_1> + ... + G/<g_k>, and each orbit carries the
/// representation induced from a random diagonal character of <g_k>,
/// conjugated by random unitaries. Returns the action on A = sum of orbits.
inline CPartialAction random_global_action(const Group& g, Rng& rng, int max_orbits = 2, int max_dim = 2) {
  if (!g.is_finite()) throw Unsupported("random_global_action needs a finite group");
  const auto elems = g.elements();
  std::uniform_int_distribution<int> norbits(1, max_orbits);
  std::uniform_int_distribution<int> dimd(1, max_dim);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);

  struct Orbit {
    std::vector<Elem> reps;   // coset representatives c_i (c_0 = e)
    std::vector<Elem> cyc;    // powers of the stabilizer generator
    int dim;
    Matrix chi;               // diagonal character value at the generator
    std::vector<Matrix> w;    // per point unitary
    int first_block;
  };
  std::vector<Orbit> orbits;
  std::vector<int> blocks;
  const int k = norbits(rng);
  for (int o = 0; o < k; ++o) {
    Orbit orb;
    orb.cyc = detail::powers(g, elems[pick(rng)]);
    std::set<Elem> covered;
    for (const auto& t : elems) {
      if (covered.count(t)) continue;
      orb.reps.push_back(t);
      for (const auto& x : orb.cyc) covered.insert(g.mul(t, x));
    }
    orb.dim = dimd(rng);
    const int q = static_cast<int>(orb.cyc.size());
    std::uniform_int_distribution<int> root(0, q - 1);
    orb.chi = Matrix::Zero(orb.dim, orb.dim);
    for (int i = 0; i < orb.dim; ++i) orb.chi(i, i) = std::polar(1.0, 2.0 * std::numbers::pi * root(rng) / q);
    for (std::size_t i = 0; i < orb.reps.size(); ++i) orb.w.push_back(random_unitary(rng, orb.dim));
    orb.first_block = static_cast<int>(blocks.size());
    for (std::size_t i = 0; i < orb.reps.size(); ++i) blocks.push_back(orb.dim);
    orbits.push_back(std::move(orb));
  }
  FdAlgebra a(blocks);

  std::map<Elem, IdealIso> table;
  for (const auto& t : elems) {
    std::vector<int> src, dst;
    std::vector<Matrix> us;
    for (const auto& orb : orbits) {
      const int r = static_cast<int>(orb.reps.size());
      for (int i = 0; i < r; ++i) {
        const Elem tc = g.mul(t, orb.reps[i]);
        // t c_i = c_j g^p
        int j = -1;
        int p = -1;
        for (int jj = 0; jj < r && j < 0; ++jj) {
          const Elem hh = g.mul(g.inv(orb.reps[jj]), tc);
          for (std::size_t pp = 0; pp < orb.cyc.size(); ++pp)
            if (orb.cyc[pp] == hh) {
              j = jj;
              p = static_cast<int>(pp);
              break;
            }
        }
        Matrix rho = Matrix::Identity(orb.dim, orb.dim);
        for (int q = 0; q < p; ++q) rho = rho * orb.chi;
        src.push_back(orb.first_block + i);
        dst.push_back(orb.first_block + j);
        us.push_back(orb.w[j] * rho * orb.w[i].adjoint());
      }
    }
    table.emplace(t, IdealIso::make(a, src, dst, us));
  }
  return CPartialAction::from_table(g, a, std::move(table));
}

/// Automorphism of A permuting blocks of equal dimension, with random unitaries.
inline IdealIso random_automorphism(const FdAlgebra& a, Rng& rng) {
  std::map<int, std::vector<int>> by_dim;
  for (int j = 0; j < a.block_count(); ++j) by_dim[a.block_dim(j)].push_back(j);
  std::vector<int> src, dst;
  std::vector<Matrix> us;
  for (auto& [d, js] : by_dim) {
    std::vector<int> perm = js;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < js.size(); ++k) {
      src.push_back(js[k]);
      dst.push_back(perm[k]);
      us.push_back(random_unitary(rng, d));
    }
  }
  return IdealIso::make(a, src, dst, us);
}

/// Global action of a free group or lattice given by random generator
/// automorphisms; lattice generators are powers of one automorphism so that
/// they commute.
inline CPartialAction random_generated_action(const Group& g, const FdAlgebra& a, Rng& rng) {
  std::vector<IdealIso> gens;
  if (g.kind() == GroupKind::free) {
    for (int i = 0; i < g.rank(); ++i) gens.push_back(random_automorphism(a, rng));
  } else if (g.kind() == GroupKind::lattice) {
    const IdealIso base = random_automorphism(a, rng);
    std::uniform_int_distribution<int> pw(1, 2);
    for (int i = 0; i < g.rank(); ++i) {
      IdealIso f = IdealIso::identity(a);
      const int p = pw(rng);
      for (int k = 0; k < p; ++k) f = CPartialAction::compose(base, f);
      gens.push_back(f);
    }
  } else {
    throw Unsupported("random_generated_action needs a free group or a lattice");
  }
  return CPartialAction::from_generators(g, a, std::move(gens));
}

/// Random global action for any kind of group.
inline CPartialAction random_action(const Group& g, Rng& rng) {
  if (g.is_finite()) return random_global_action(g, rng);
  return random_generated_action(g, random_algebra(rng), rng);
}

/// Restriction of a random global action to a random ideal.
inline CPartialAction random_partial_action(const Group& g, Rng& rng) {
  const CPartialAction global = random_action(g, rng);
  return restrict(global, random_ideal(global.algebra(), rng));
}

/// Unitary u_t of A_t for every t (u_e = 1), drawn lazily from a seed derived
/// from t so that the family is a deterministic function of (seed, t).
inline std::function<FdElement(const Elem&)> random_unitary_family(const CPartialAction& gamma, std::uint64_t seed) {
  struct Cache {
    std::mutex mu;
    std::map<Elem, FdElement> values;
  };
  auto cache = std::make_shared<Cache>();
  return [gamma, seed, cache](const Elem& t) {
    std::lock_guard<std::mutex> lock(cache->mu);
    auto it = cache->values.find(t);
    if (it != cache->values.end()) return it->second;
    const FdAlgebra& a = gamma.algebra();
    FdElement u = FdElement::zero(a);
    if (t == gamma.group().id()) {
      u = FdElement::unit(a);
    } else {
      std::uint64_t h = fnv1a(&seed, sizeof seed);
      h = fnv1a(t.code.data(), t.code.size() * sizeof(int), h);
      Rng local(h);
      for (int j : gamma.domain(t).blocks) u.blocks[j] = random_unitary(local, a.block_dim(j));
    }
    cache->values.emplace(t, u);
    return u;
  };
}

/// Random twisted partial action: a random partial action perturbed by
/// random unitaries (see perturb_by_unitaries).
inline std::pair<CPartialAction, Twist> random_twisted(const Group& g, Rng& rng) {
  const CPartialAction pa = random_partial_action(g, rng);
  return perturb_by_unitaries(pa, random_unitary_family(pa, rng()));
}

}  // namespace fellap
