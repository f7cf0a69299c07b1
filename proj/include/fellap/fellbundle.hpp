#pragma once

// Fell bundles over a group with finite-dimensional fibers.
//
// A bundle is a model answering dim(t), mul and star on coordinate vectors.
// The unit fiber B_e is always a block algebra, and its coordinates are the
// row-major block entries (see ideal_coords). Semidirect and twisted bundles
// have fiber A_t over t, coordinatized the same way inside A.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fellap/fdalg.hpp"

namespace fellap {

class BundleModel {
 public:
  virtual ~BundleModel() = default;
  virtual const Group& group() const = 0;
  virtual const FdAlgebra& unit_algebra() const = 0;
  virtual int dim(const Elem& t) const = 0;
  /// Product B_s x B_t -> B_st.
  virtual Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const = 0;
  /// Involution B_t -> B_{t^-1}.
  virtual Vector star(const Elem& t, const Vector& x) const = 0;
  /// A norm the fiber carries on its own (e.g. the algebra norm of A_t), used
  /// to test the C*-identity; models without one return nullopt.
  virtual std::optional<double> native_norm(const Elem&, const Vector&) const { return std::nullopt; }
  virtual std::string describe() const = 0;
};

class FellBundle {
 public:
  explicit FellBundle(std::shared_ptr<const BundleModel> model) : model_(std::move(model)) {}

  const Group& group() const { return model_->group(); }
  const FdAlgebra& unit_algebra() const { return model_->unit_algebra(); }
  const BundleModel& model() const { return *model_; }
  std::string describe() const { return model_->describe(); }

  int dim(const Elem& t) const { return model_->dim(t); }
  Vector zero(const Elem& t) const { return Vector::Zero(dim(t)); }

  Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const {
    check(s, x);
    check(t, y);
    return model_->mul(s, x, t, y);
  }
  Vector star(const Elem& t, const Vector& x) const {
    check(t, x);
    return model_->star(t, x);
  }

  /// Unit-fiber coordinates as an element of B_e, and back.
  FdElement to_unit(const Vector& x) const { return ideal_element(unit_algebra(), Ideal::whole(unit_algebra()), x); }
  Vector from_unit(const FdElement& x) const { return ideal_coords(unit_algebra(), Ideal::whole(unit_algebra()), x); }

  void check(const Elem& t, const Vector& x) const {
    if (x.size() != dim(t))
      throw ShapeMismatch("vector of length " + std::to_string(x.size()) + " is not in fiber " + group().format(t) +
                          " (dim " + std::to_string(dim(t)) + ")");
  }

  bool same(const FellBundle& o) const { return model_ == o.model_; }

 private:
  std::shared_ptr<const BundleModel> model_;
};

/// ||b|| = ||b^* b||^{1/2}, with b^* b computed in B_e.
inline double fiber_norm(const FellBundle& b, const Elem& t, const Vector& x) {
  const Group& g = b.group();
  const Vector xx = b.mul(g.inv(t), b.star(t, x), t, x);
  return std::sqrt(op_norm(b.unit_algebra(), b.to_unit(xx)));
}

/// Semidirect product bundle {A_t delta_t}:
///   (a d_s)(b d_t) = alpha_s(alpha_{s^-1}(a) b) d_st,   (a d_s)^* = alpha_{s^-1}(a)^* d_{s^-1}.
class SemidirectModel : public BundleModel {
 public:
  explicit SemidirectModel(CPartialAction pa) : pa_(std::move(pa)) {}

  const Group& group() const override { return pa_.group(); }
  const FdAlgebra& unit_algebra() const override { return pa_.algebra(); }
  const CPartialAction& action() const { return pa_; }

  int dim(const Elem& t) const override { return pa_.domain(t).dim(pa_.algebra()); }

  FdElement element(const Elem& t, const Vector& x) const { return ideal_element(pa_.algebra(), pa_.domain(t), x); }
  Vector coords(const Elem& t, const FdElement& a) const { return ideal_coords(pa_.algebra(), pa_.domain(t), a); }

  Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const override {
    const Group& g = pa_.group();
    const FdElement a = element(s, x);
    const FdElement b = element(t, y);
    const FdElement r = pa_.apply(s, pa_.apply(g.inv(s), a) * b);
    return coords(g.mul(s, t), r);
  }

  Vector star(const Elem& s, const Vector& x) const override {
    const Elem sinv = pa_.group().inv(s);
    return coords(sinv, pa_.apply(sinv, element(s, x)).adjoint());
  }

  std::optional<double> native_norm(const Elem& t, const Vector& x) const override {
    return op_norm(pa_.algebra(), element(t, x));
  }

  std::string describe() const override {
    return "semidirect(" + pa_.group().name() + " on " + pa_.algebra().describe() + ")";
  }

 private:
  CPartialAction pa_;
};

/// Unitary twist omega(s,t) in A_s cap A_st.
class Twist {
 public:
  using Fn = std::function<FdElement(const Elem&, const Elem&)>;
  explicit Twist(Fn fn) : fn_(std::move(fn)) {}
  FdElement operator()(const Elem& s, const Elem& t) const { return fn_(s, t); }

  /// omega(s,t) = 1_{A_s cap A_st}.
  static Twist trivial(const CPartialAction& gamma) {
    return Twist([gamma](const Elem& s, const Elem& t) {
      return (gamma.domain(s) & gamma.domain(gamma.group().mul(s, t))).unit(gamma.algebra());
    });
  }

  /// Explicit values; pairs not listed default to the unit of A_s cap A_st.
  static Twist from_table(const CPartialAction& gamma, std::map<std::pair<Elem, Elem>, FdElement> table) {
    auto shared = std::make_shared<const std::map<std::pair<Elem, Elem>, FdElement>>(std::move(table));
    Twist unit = trivial(gamma);
    return Twist([shared, unit](const Elem& s, const Elem& t) {
      auto it = shared->find({s, t});
      return it == shared->end() ? unit(s, t) : it->second;
    });
  }

 private:
  Fn fn_;
};

/// Perturbs a partial action by unitaries u_t of A_t (u_e = 1):
///   gamma'_t = Ad(u_t) o gamma_t,   omega(r,s) = u_r gamma_r(u_s 1_{r^-1}) u_rs^*,
/// which is a twisted partial action whose family gamma' generally is not a
/// partial action.
inline std::pair<CPartialAction, Twist> perturb_by_unitaries(const CPartialAction& gamma,
                                                             std::function<FdElement(const Elem&)> u) {
  const FdAlgebra a = gamma.algebra();
  const Group g = gamma.group();
  auto ufn = std::make_shared<std::function<FdElement(const Elem&)>>(std::move(u));
  CPartialAction family(g, a, [gamma, a, ufn](const Elem& t) {
    IdealIso f = gamma.iso(t);
    const FdElement ut = (*ufn)(t);
    for (std::size_t k = 0; k < f.image.size(); ++k) f.unitaries[k] = ut.blocks[f.image[k]] * f.unitaries[k];
    return f;
  });
  Twist omega([gamma, a, g, ufn](const Elem& r, const Elem& s) {
    const Elem rs = g.mul(r, s);
    const Ideal both = gamma.domain(r) & gamma.domain(rs);
    const FdElement mid = gamma.apply(r, (*ufn)(s) * gamma.domain(g.inv(r)).unit(a));
    return both.cut((*ufn)(r) * mid * (*ufn)(rs).adjoint());
  });
  return {std::move(family), std::move(omega)};
}

/// Twisted semidirect bundle:
///   (a d_s)(b d_t) = gamma_s(gamma_s^{-1}(a) b) omega(s,t) d_st,
///   (a d_s)^*      = omega(s^-1,s)^* gamma_{s^-1}(a^*) d_{s^-1}.
/// The twist multiplies on the right. With omega on the left the product is
/// associative only when the twist is central.
class TwistedModel : public BundleModel {
 public:
  TwistedModel(CPartialAction gamma, Twist omega) : gamma_(std::move(gamma)), omega_(std::move(omega)) {}

  const Group& group() const override { return gamma_.group(); }
  const FdAlgebra& unit_algebra() const override { return gamma_.algebra(); }
  int dim(const Elem& t) const override { return gamma_.domain(t).dim(gamma_.algebra()); }

  FdElement element(const Elem& t, const Vector& x) const { return ideal_element(gamma_.algebra(), gamma_.domain(t), x); }
  Vector coords(const Elem& t, const FdElement& a) const { return ideal_coords(gamma_.algebra(), gamma_.domain(t), a); }

  Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const override {
    const FdAlgebra& alg = gamma_.algebra();
    const IdealIso& gs = gamma_.iso(s);
    const FdElement pulled = gs.inverse().apply(alg, element(s, x));
    const FdElement r = gs.apply(alg, pulled * element(t, y)) * omega_(s, t);
    return coords(gamma_.group().mul(s, t), r);
  }

  Vector star(const Elem& s, const Vector& x) const override {
    const Elem sinv = gamma_.group().inv(s);
    const FdElement r = omega_(sinv, s).adjoint() * gamma_.apply(sinv, element(s, x).adjoint());
    return coords(sinv, r);
  }

  std::optional<double> native_norm(const Elem& t, const Vector& x) const override {
    return op_norm(gamma_.algebra(), element(t, x));
  }

  std::string describe() const override {
    return "twisted(" + gamma_.group().name() + " on " + gamma_.algebra().describe() + ")";
  }

 private:
  CPartialAction gamma_;
  Twist omega_;
};

/// Bundle given by explicit structure tensors over a finite group.
class TensorModel : public BundleModel {
 public:
  /// products[s][t][i] is the dim(st) x dim(t) matrix of y -> e_i y for the
  /// i-th basis vector e_i of B_s; stars[t] is the dim(t^-1) x dim(t) matrix S
  /// with x^* = S conj(x).
  TensorModel(Group g, FdAlgebra unit, std::vector<int> dims,
              std::vector<std::vector<std::vector<Matrix>>> products, std::vector<Matrix> stars)
      : g_(std::move(g)), unit_(std::move(unit)), dims_(std::move(dims)), products_(std::move(products)),
        stars_(std::move(stars)) {
    if (!g_.is_finite()) throw Unsupported("structure tensors need a finite group");
    const int n = g_.order();
    if (static_cast<int>(dims_.size()) != n || static_cast<int>(products_.size()) != n ||
        static_cast<int>(stars_.size()) != n)
      throw ShapeMismatch("structure tensors: one entry per group element required");
    if (dims_[g_.index(g_.id())] != unit_.dim()) throw ShapeMismatch("structure tensors: unit fiber dimension");
  }

  const Group& group() const override { return g_; }
  const FdAlgebra& unit_algebra() const override { return unit_; }
  int dim(const Elem& t) const override { return dims_[g_.index(t)]; }

  Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const override {
    const auto& tensor = products_[g_.index(s)][g_.index(t)];
    Vector r = Vector::Zero(dim(g_.mul(s, t)));
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) != Complex(0.0)) r += x(i) * (tensor[i] * y);
    return r;
  }

  Vector star(const Elem& t, const Vector& x) const override { return stars_[g_.index(t)] * x.conjugate(); }

  std::string describe() const override { return "tensor(" + g_.name() + ")"; }

  /// Copy with one structure constant shifted by delta.
  TensorModel perturbed(const Elem& s, const Elem& t, int i, int row, int col, Complex delta) const {
    TensorModel copy = *this;
    copy.products_[g_.index(s)][g_.index(t)].at(i)(row, col) += delta;
    return copy;
  }

 private:
  Group g_;
  FdAlgebra unit_;
  std::vector<int> dims_;
  std::vector<std::vector<std::vector<Matrix>>> products_;
  std::vector<Matrix> stars_;
};

/// Explicit structure tensors of a bundle over a finite group.
inline TensorModel tabulate(const FellBundle& b) {
  const Group& g = b.group();
  if (!g.is_finite()) throw Unsupported("tabulate needs a finite group");
  const auto elems = g.elements();
  const int n = g.order();
  std::vector<int> dims(n);
  std::vector<std::vector<std::vector<Matrix>>> products(n, std::vector<std::vector<Matrix>>(n));
  std::vector<Matrix> stars(n);
  for (const auto& t : elems) dims[g.index(t)] = b.dim(t);
  for (const auto& s : elems) {
    for (const auto& t : elems) {
      auto& slot = products[g.index(s)][g.index(t)];
      const int ds = b.dim(s);
      const int dt = b.dim(t);
      const int dst = b.dim(g.mul(s, t));
      for (int i = 0; i < ds; ++i) {
        Matrix m(dst, dt);
        const Vector ei = Vector::Unit(ds, i);
        for (int k = 0; k < dt; ++k) m.col(k) = b.mul(s, ei, t, Vector::Unit(dt, k));
        slot.push_back(std::move(m));
      }
    }
    const int ds = b.dim(s);
    Matrix st(b.dim(g.inv(s)), ds);
    for (int i = 0; i < ds; ++i) st.col(i) = b.star(s, Vector::Unit(ds, i));
    stars[g.index(s)] = std::move(st);
  }
  return TensorModel(g, b.unit_algebra(), std::move(dims), std::move(products), std::move(stars));
}

/// Restriction of a bundle to a finite subgroup, presented over the subgroup's
/// own multiplication table (element k of the table is subgroup[k]).
class SubgroupModel : public BundleModel {
 public:
  SubgroupModel(FellBundle parent, Group sub, std::vector<Elem> embedding)
      : parent_(std::move(parent)), sub_(std::move(sub)), embedding_(std::move(embedding)) {}

  const Group& group() const override { return sub_; }
  const FdAlgebra& unit_algebra() const override { return parent_.unit_algebra(); }
  int dim(const Elem& t) const override { return parent_.dim(lift(t)); }
  Vector mul(const Elem& s, const Vector& x, const Elem& t, const Vector& y) const override {
    return parent_.mul(lift(s), x, lift(t), y);
  }
  Vector star(const Elem& t, const Vector& x) const override { return parent_.star(lift(t), x); }
  std::optional<double> native_norm(const Elem& t, const Vector& x) const override {
    return parent_.model().native_norm(lift(t), x);
  }
  std::string describe() const override { return parent_.describe() + "|" + sub_.name(); }
  const Elem& lift(const Elem& t) const { return embedding_.at(sub_.index(t)); }

 private:
  FellBundle parent_;
  Group sub_;
  std::vector<Elem> embedding_;
};

/// Bundle over H = {h_0 = e, h_1, ...}; H must be a finite subgroup.
inline FellBundle restrict_to_subgroup(const FellBundle& b, std::vector<Elem> subgroup) {
  const Group& g = b.group();
  if (!is_subgroup(g, subgroup)) throw Error("restrict_to_subgroup: not a subgroup");
  std::sort(subgroup.begin(), subgroup.end());
  auto e = std::find(subgroup.begin(), subgroup.end(), g.id());
  std::rotate(subgroup.begin(), e, e + 1);
  const int n = static_cast<int>(subgroup.size());
  std::map<Elem, int> pos;
  for (int i = 0; i < n; ++i) pos[subgroup[i]] = i;
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) table[i][j] = pos.at(g.mul(subgroup[i], subgroup[j]));
  Group h = Group::finite(std::move(table), g.name() + "-sub" + std::to_string(n));
  return FellBundle(std::make_shared<SubgroupModel>(b, std::move(h), std::move(subgroup)));
}

/// Checks the twisted partial action conditions on window^3:
///  (1) A_e = A, gamma_e = id
///  (2) gamma_r(A_{r^-1} cap A_s) = A_r cap A_rs
///  (3) gamma_r(gamma_s(a)) = omega(r,s) gamma_rs(a) omega(r,s)^*  on A_{s^-1} cap A_{s^-1 r^-1}
///  (4) omega(t,e) = omega(e,t) = 1
///  (5) gamma_r(a omega(s,t)) omega(r,st) = gamma_r(a) omega(r,s) omega(rs,t)  on A_{r^-1} cap A_s cap A_st
/// and that each omega(s,t) is a unitary of A_s cap A_st.
inline Report validate_twisted(const CPartialAction& gamma, const Twist& omega, int radius, std::uint64_t seed = 0,
                               double tol = 1e-10) {
  Report rep(tol);
  const Group& g = gamma.group();
  const FdAlgebra& a = gamma.algebra();
  const auto elems = window_elements(g, radius);
  const Elem e = g.id();
  Rng rng(seed);
  auto sample_in = [&](const Ideal& i) { return i.cut(FdElement::random(a, rng)); };

  const IdealIso& ge = gamma.iso(e);
  if (ge.source != Ideal::whole(a) || ge.target != Ideal::whole(a))
    rep.fail("condition (1)", "A_e != A");
  else
    rep.record("condition (1)", iso_distance(ge, IdealIso::identity(a)), "e");

  for (const auto& s : elems)
    for (const auto& t : elems) {
      const Elem st = g.mul(s, t);
      const Ideal ideal = gamma.domain(s) & gamma.domain(st);
      const FdElement w = omega(s, t);
      const std::string wit = "s=" + g.format(s) + " t=" + g.format(t);
      if (!w.fits(a)) {
        rep.fail("twist-unitary", wit);
        continue;
      }
      rep.record("twist-unitary",
                 std::max(ideal.leakage(w), distance(w * w.adjoint(), ideal.unit(a))) +
                     distance(w.adjoint() * w, ideal.unit(a)),
                 wit);
    }

  for (const auto& t : elems) {
    const std::string wit = "t=" + g.format(t);
    const FdElement one_t = gamma.domain(t).unit(a);
    rep.record("condition (4)", std::max(distance(omega(t, e), one_t), distance(omega(e, t), one_t)), wit);
  }

  for (const auto& r : elems) {
    const Elem rinv = g.inv(r);
    const IdealIso& gr = gamma.iso(r);
    for (const auto& s : elems) {
      const Elem rs = g.mul(r, s);
      const std::string w2 = "r=" + g.format(r) + " s=" + g.format(s);
      std::vector<int> img;
      for (int j : (gamma.domain(rinv) & gamma.domain(s)).blocks) img.push_back(gr.map_block(j));
      rep.record("condition (2)", Ideal(img) == (gamma.domain(r) & gamma.domain(rs)) ? 0.0 : 1.0, w2);

      const Ideal dom3 = gamma.domain(g.inv(s)) & gamma.domain(g.inv(rs));
      const FdElement a3 = sample_in(dom3);
      const FdElement w = omega(r, s);
      const FdElement lhs3 = gamma.apply(r, gamma.apply(s, a3));
      const FdElement rhs3 = w * gamma.apply(rs, a3) * w.adjoint();
      rep.record("condition (3)", distance(lhs3, rhs3), w2);

      for (const auto& t : elems) {
        const Elem st = g.mul(s, t);
        const Ideal dom5 = gamma.domain(rinv) & gamma.domain(s) & gamma.domain(st);
        const std::string w3 = "r=" + g.format(r) + " s=" + g.format(s) + " t=" + g.format(t);
        double worst = 0.0;
        for (const FdElement& x : {dom5.unit(a), sample_in(dom5)}) {
          const FdElement lhs = gamma.apply(r, x * omega(s, t)) * omega(r, st);
          const FdElement rhs = gamma.apply(r, x) * omega(r, s) * omega(rs, t);
          worst = std::max(worst, distance(lhs, rhs));
        }
        rep.record("condition (5)", worst, w3);
      }
    }
  }
  return rep;
}

/// Semidirect bundle of a partial action validated on window(radius).
inline FellBundle make_semidirect(const CPartialAction& pa, int radius = 2) {
  Report rep = validate_partial_action(pa, radius);
  if (!rep.ok()) throw ValidationError("make_semidirect: not a partial action", rep);
  return FellBundle(std::make_shared<SemidirectModel>(pa));
}

/// Twisted bundle of (gamma, omega) validated on window(radius).
inline FellBundle make_twisted(const CPartialAction& gamma, const Twist& omega, int radius = 2) {
  Report rep = validate_twisted(gamma, omega, radius);
  if (!rep.ok()) throw ValidationError("make_twisted: not a twisted partial action", rep);
  return FellBundle(std::make_shared<TwistedModel>(gamma, omega));
}

/// Group bundle B_t = A for all t, i.e. the semidirect bundle of the trivial global action.
inline FellBundle make_group_bundle(const Group& g, const FdAlgebra& a) {
  return FellBundle(std::make_shared<SemidirectModel>(CPartialAction::identity_action(g, a)));
}

/// Random element of fiber t with unit coordinate norm.
inline Vector random_fiber_element(const FellBundle& b, const Elem& t, Rng& rng) {
  Vector v = random_vector(rng, b.dim(t));
  const double n = v.norm();
  if (n > 0) v /= n;
  return v;
}

/// Samples triples from window(radius) and records the worst residual of each
/// Fell-bundle axiom: associativity, (ab)^* = b^* a^*, a^** = a,
/// conjugate-linearity of *, ||ab|| <= ||a|| ||b||, ||a^* a|| = ||a||^2,
/// positivity of a^* a in B_e, and agreement of B_e's product with its algebra.
inline Report validate_bundle(const FellBundle& b, int radius, int samples, std::uint64_t seed = 0,
                              double tol = 1e-10) {
  Report rep(tol);
  const Group& g = b.group();
  const FdAlgebra& ae = b.unit_algebra();
  const auto elems = window_elements(g, radius);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
  const Elem e = g.id();

  for (int n = 0; n < samples; ++n) {
    const Elem& r = elems[pick(rng)];
    const Elem& s = elems[pick(rng)];
    const Elem& t = elems[pick(rng)];
    const Vector x = random_fiber_element(b, r, rng);
    const Vector y = random_fiber_element(b, s, rng);
    const Vector z = random_fiber_element(b, t, rng);
    const Complex lambda = random_complex(rng);
    const std::string w = "r=" + g.format(r) + " s=" + g.format(s) + " t=" + g.format(t);
    const Elem rs = g.mul(r, s);

    const Vector left = b.mul(rs, b.mul(r, x, s, y), t, z);
    const Vector right = b.mul(r, x, g.mul(s, t), b.mul(s, y, t, z));
    rep.record("associativity", max_abs(left - right), w);

    const Vector xy = b.mul(r, x, s, y);
    rep.record("involution-antihom",
               max_abs(b.star(rs, xy) - b.mul(g.inv(s), b.star(s, y), g.inv(r), b.star(r, x))), w);
    rep.record("involutive", max_abs(b.star(g.inv(r), b.star(r, x)) - x), w);
    rep.record("conjugate-linear",
               max_abs(b.star(r, x + lambda * x.reverse()) -
                       (b.star(r, x) + std::conj(lambda) * b.star(r, x.reverse()))),
               w);

    const double nx = fiber_norm(b, r, x);
    const double ny = fiber_norm(b, s, y);
    rep.record("submultiplicative", std::max(0.0, fiber_norm(b, rs, xy) - nx * ny), w);

    const FdElement xx = b.to_unit(b.mul(g.inv(r), b.star(r, x), r, x));
    const double native = b.model().native_norm(r, x).value_or(nx);
    rep.record("c-star-identity", std::abs(op_norm(ae, xx) - native * native), w);
    const auto [min_eig, herm] = positivity_defect(xx);
    rep.record("positivity", std::max(herm, std::max(0.0, -min_eig)), w);

    if (!ae.blocks().empty()) {
      const FdElement u = FdElement::random(ae, rng);
      const FdElement v = FdElement::random(ae, rng);
      rep.record("unit-fiber-product", distance(b.to_unit(b.mul(e, b.from_unit(u), e, b.from_unit(v))), u * v), w);
      rep.record("unit-fiber-star", distance(b.to_unit(b.star(e, b.from_unit(u))), u.adjoint()), w);
    }
  }
  return rep;
}

/// Finitely supported section t -> f(t) in B_t.
class FellSection {
 public:
  explicit FellSection(FellBundle b) : bundle_(std::move(b)) {}

  static FellSection delta(const FellBundle& b, const Elem& t, const Vector& v) {
    FellSection f(b);
    f.set(t, v);
    return f;
  }

  const FellBundle& bundle() const { return bundle_; }
  const std::map<Elem, Vector>& values() const { return values_; }

  void set(const Elem& t, Vector v) {
    bundle_.check(t, v);
    values_[t] = std::move(v);
  }
  void add(const Elem& t, const Vector& v) {
    auto it = values_.find(t);
    if (it == values_.end())
      set(t, v);
    else
      it->second += v;
  }
  Vector at(const Elem& t) const {
    auto it = values_.find(t);
    return it == values_.end() ? bundle_.zero(t) : it->second;
  }

 private:
  FellBundle bundle_;
  std::map<Elem, Vector> values_;
};

inline void same_bundle(const FellBundle& a, const FellBundle& b) {
  if (!a.same(b)) throw BundleMismatch("objects belong to different bundles");
}

/// Section with independent random values on `support`.
inline FellSection random_section(const FellBundle& b, const std::vector<Elem>& support, Rng& rng) {
  FellSection f(b);
  for (const auto& t : support) f.set(t, random_vector(rng, b.dim(t)));
  return f;
}

/// Max coordinate difference over the union of supports.
inline double section_distance(const FellSection& f, const FellSection& g) {
  same_bundle(f.bundle(), g.bundle());
  double m = 0.0;
  for (const auto& [t, v] : f.values()) m = std::max(m, max_abs(v - g.at(t)));
  for (const auto& [t, v] : g.values()) m = std::max(m, max_abs(v - f.at(t)));
  return m;
}

/// <f, g> = sum_t f(t)^* g(t) in B_e.
inline FdElement l2_inner(const FellSection& f, const FellSection& g) {
  same_bundle(f.bundle(), g.bundle());
  const FellBundle& b = f.bundle();
  const Group& grp = b.group();
  Vector acc = b.zero(grp.id());
  for (const auto& [t, v] : f.values()) {
    auto it = g.values().find(t);
    if (it == g.values().end()) continue;
    acc += b.mul(grp.inv(t), b.star(t, v), t, it->second);
  }
  return b.to_unit(acc);
}

/// (f * g)(t) = sum_s f(s) g(s^-1 t).
inline FellSection l1_conv(const FellSection& f, const FellSection& g) {
  same_bundle(f.bundle(), g.bundle());
  const FellBundle& b = f.bundle();
  const Group& grp = b.group();
  FellSection out(b);
  for (const auto& [s, x] : f.values())
    for (const auto& [u, y] : g.values()) out.add(grp.mul(s, u), b.mul(s, x, u, y));
  return out;
}

/// f^*(t) = f(t^-1)^*.
inline FellSection sec_star(const FellSection& f) {
  const FellBundle& b = f.bundle();
  FellSection out(b);
  for (const auto& [t, v] : f.values()) out.set(b.group().inv(t), b.star(t, v));
  return out;
}

/// Right multiplication by c in B_e: (f c)(t) = f(t) c.
inline FellSection right_mul(const FellSection& f, const FdElement& c) {
  const FellBundle& b = f.bundle();
  const Elem e = b.group().id();
  const Vector cv = b.from_unit(c);
  FellSection out(b);
  for (const auto& [t, v] : f.values()) out.set(t, b.mul(t, v, e, cv));
  return out;
}

inline FellSection section_sum(const FellSection& f, const FellSection& g, Complex scale = 1.0) {
  same_bundle(f.bundle(), g.bundle());
  FellSection out = f;
  for (const auto& [t, v] : g.values()) out.add(t, scale * v);
  return out;
}

/// Regular representation: (Lambda_b g)(s) = b g(t^-1 s) for b in B_t.
inline FellSection regular_rep(const FellBundle& bundle, const Elem& t, const Vector& b, const FellSection& f) {
  same_bundle(bundle, f.bundle());
  const Group& grp = bundle.group();
  FellSection out(bundle);
  for (const auto& [u, y] : f.values()) out.add(grp.mul(t, u), bundle.mul(t, b, u, y));
  return out;
}

/// E(f) = f(e).
inline FdElement canonical_expectation(const FellSection& f) {
  return f.bundle().to_unit(f.at(f.bundle().group().id()));
}

}  // namespace fellap
