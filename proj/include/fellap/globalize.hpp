#pragma once

// Enveloping (global) action of a partial action of a finite group.
//
// A is embedded into the G-fold sum  (+)_{t in G} A  by iota(x)(t) = alpha_{t^-1}(1_t x),
// translations act by tau_s(f)(r) = f(s^-1 r), and N is the linear span of the
// translates of iota(A). Every translate tau_s iota(block j) is a full matrix
// block embedded diagonally (up to unitaries) into several ambient blocks;
// distinct supports give the blocks of N.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fellap/fdalg.hpp"

namespace fellap {

class Globalization {
 public:
  /// One ambient block hit by an N-block, and the unitary of the diagonal embedding.
  struct Leg {
    int ambient_block;
    Matrix unitary;
  };

  const Group& group() const { return group_; }
  const FdAlgebra& algebra() const { return algebra_; }
  /// (+)_{t in G} A with block (t, k) at index index(t) * m + k.
  const FdAlgebra& ambient() const { return ambient_; }
  /// The enveloping algebra N.
  const FdAlgebra& enveloping() const { return enveloping_; }
  /// The global action sigma on N.
  const CPartialAction& action() const { return *action_; }
  /// iota(A) as an ideal of N.
  const Ideal& image() const { return image_; }
  const std::vector<Leg>& legs(int n_block) const { return legs_.at(n_block); }

  /// iota : A -> N.
  FdElement iota(const FdElement& x) const {
    if (!x.fits(algebra_)) throw ShapeMismatch("iota: element does not fit A");
    FdElement y = FdElement::zero(enveloping_);
    for (int j = 0; j < algebra_.block_count(); ++j) {
      const auto& [beta, v] = iota_blocks_[j];
      y.blocks[beta] = v * x.blocks[j] * v.adjoint();
    }
    return y;
  }

  /// The inclusion of N into the ambient algebra.
  FdElement embed(const FdElement& y) const {
    if (!y.fits(enveloping_)) throw ShapeMismatch("embed: element does not fit N");
    FdElement z = FdElement::zero(ambient_);
    for (std::size_t b = 0; b < legs_.size(); ++b)
      for (const auto& leg : legs_[b]) z.blocks[leg.ambient_block] = leg.unitary * y.blocks[b] * leg.unitary.adjoint();
    return z;
  }

  /// iota evaluated straight from its defining formula, as an ambient element.
  FdElement iota_ambient(const FdElement& x) const {
    const int m = algebra_.block_count();
    FdElement z = FdElement::zero(ambient_);
    for (const auto& t : group_.elements()) {
      const FdElement piece = pa_->iso(group_.inv(t)).apply(algebra_, pa_->domain(t).cut(x));
      for (int k = 0; k < m; ++k) z.blocks[group_.index(t) * m + k] = piece.blocks[k];
    }
    return z;
  }

  /// Left translation tau_s(f)(r) = f(s^-1 r) on the ambient algebra.
  FdElement translate(const Elem& s, const FdElement& f) const {
    const int m = algebra_.block_count();
    FdElement z = FdElement::zero(ambient_);
    for (const auto& r : group_.elements()) {
      const int src = group_.index(group_.mul(group_.inv(s), r));
      for (int k = 0; k < m; ++k) z.blocks[group_.index(r) * m + k] = f.blocks[src * m + k];
    }
    return z;
  }

  /// Ranks certifying that span{tau_s iota(A)} equals N inside the ambient
  /// algebra: orbit_rank == n_dim == joint_rank.
  struct SpanCheck {
    long orbit_rank = 0;
    long n_dim = 0;
    long joint_rank = 0;
    bool equal() const { return orbit_rank == n_dim && joint_rank == n_dim; }
  };

  SpanCheck orbit_span_check() const {
    const Ideal all = Ideal::whole(ambient_);
    std::vector<Vector> orbit;
    for (const auto& s : group_.elements())
      for (int j = 0; j < algebra_.block_count(); ++j)
        for (int r = 0; r < algebra_.block_dim(j); ++r)
          for (int c = 0; c < algebra_.block_dim(j); ++c)
            orbit.push_back(ideal_coords(ambient_, all, translate(s, iota_ambient(FdElement::matrix_unit(algebra_, j, r, c)))));
    std::vector<Vector> nbasis;
    for (int b = 0; b < enveloping_.block_count(); ++b)
      for (int r = 0; r < enveloping_.block_dim(b); ++r)
        for (int c = 0; c < enveloping_.block_dim(b); ++c)
          nbasis.push_back(ideal_coords(ambient_, all, embed(FdElement::matrix_unit(enveloping_, b, r, c))));
    auto stack = [&](const std::vector<Vector>& a, const std::vector<Vector>& b) {
      Matrix m(ambient_.dim(), static_cast<Eigen::Index>(a.size() + b.size()));
      Eigen::Index k = 0;
      for (const auto& v : a) m.col(k++) = v;
      for (const auto& v : b) m.col(k++) = v;
      return m;
    };
    SpanCheck out;
    out.orbit_rank = static_cast<long>(numerical_rank(stack(orbit, {})));
    out.n_dim = enveloping_.dim();
    out.joint_rank = static_cast<long>(numerical_rank(stack(orbit, nbasis)));
    return out;
  }

  friend Globalization globalize_finite(const CPartialAction& pa);

 private:
  Group group_ = Group::cyclic(1);
  FdAlgebra algebra_;
  FdAlgebra ambient_;
  FdAlgebra enveloping_;
  std::shared_ptr<const CPartialAction> pa_;
  std::shared_ptr<const CPartialAction> action_;
  Ideal image_;
  std::vector<std::vector<Leg>> legs_;
  std::vector<std::pair<int, Matrix>> iota_blocks_;
};

/// Builds the enveloping action of a partial action of a finite group.
/// Throws Unsupported for infinite groups and ValidationError when pa is not a
/// partial action.
inline Globalization globalize_finite(const CPartialAction& pa) {
  const Group& g = pa.group();
  if (!g.is_finite()) throw Unsupported("globalization is only available for finite groups");
  Report rep = validate_partial_action(pa, 0);
  if (!rep.ok()) throw ValidationError("globalize: input is not a partial action", rep);

  const FdAlgebra& a = pa.algebra();
  const int m = a.block_count();
  const auto elems = g.elements();

  Globalization out;
  out.group_ = g;
  out.algebra_ = a;
  out.pa_ = std::make_shared<const CPartialAction>(pa);
  std::vector<int> amb;
  for (int i = 0; i < g.order(); ++i) amb.insert(amb.end(), a.blocks().begin(), a.blocks().end());
  out.ambient_ = FdAlgebra(amb);

  // Support of tau_s iota(block j), with the unitary on each ambient block.
  auto pattern = [&](const Elem& s, int j) {
    std::vector<Globalization::Leg> legs;
    for (const auto& t : elems) {
      if (!pa.domain(t).contains(j)) continue;
      const IdealIso& back = pa.iso(g.inv(t));
      legs.push_back({g.index(g.mul(s, t)) * m + back.map_block(j), back.unitary_of(j)});
    }
    std::sort(legs.begin(), legs.end(),
              [](const Globalization::Leg& x, const Globalization::Leg& y) { return x.ambient_block < y.ambient_block; });
    return legs;
  };

  std::vector<int> owner(out.ambient_.block_count(), -1);
  std::vector<std::pair<Elem, int>> reps;
  std::vector<int> ndims;
  for (const auto& s : elems)
    for (int j = 0; j < m; ++j) {
      auto legs = pattern(s, j);
      if (legs.empty()) throw Error("globalize: empty orbit pattern");
      const int first = owner[legs.front().ambient_block];
      if (first >= 0) continue;
      const int beta = static_cast<int>(out.legs_.size());
      for (const auto& leg : legs) {
        if (owner[leg.ambient_block] >= 0) throw Error("globalize: translates overlap partially");
        owner[leg.ambient_block] = beta;
      }
      out.legs_.push_back(std::move(legs));
      reps.emplace_back(s, j);
      ndims.push_back(a.block_dim(j));
    }
  out.enveloping_ = FdAlgebra(ndims);

  // tau_s iota(x_j) = embed(V x V^*) placed in N-block beta.
  auto locate = [&](const Elem& s, int j) -> std::pair<int, Matrix> {
    const auto legs = pattern(s, j);
    const int beta = owner[legs.front().ambient_block];
    const auto& ref = out.legs_[beta];
    if (ref.size() != legs.size()) throw Error("globalize: translates overlap partially");
    for (std::size_t k = 0; k < legs.size(); ++k)
      if (ref[k].ambient_block != legs[k].ambient_block) throw Error("globalize: translates overlap partially");
    return {beta, ref.front().unitary.adjoint() * legs.front().unitary};
  };

  for (int j = 0; j < m; ++j) out.iota_blocks_.push_back(locate(g.id(), j));
  std::vector<int> img;
  for (const auto& [beta, v] : out.iota_blocks_) img.push_back(beta);
  out.image_ = Ideal(img);

  std::map<Elem, IdealIso> table;
  for (const auto& r : elems) {
    std::vector<int> src, dst;
    std::vector<Matrix> us;
    for (std::size_t beta = 0; beta < reps.size(); ++beta) {
      auto [target, v] = locate(g.mul(r, reps[beta].first), reps[beta].second);
      src.push_back(static_cast<int>(beta));
      dst.push_back(target);
      us.push_back(std::move(v));
    }
    table.emplace(r, IdealIso::make(out.enveloping_, src, dst, us));
  }
  out.action_ = std::make_shared<const CPartialAction>(CPartialAction::from_table(g, out.enveloping_, std::move(table)));
  return out;
}

}  // namespace fellap
