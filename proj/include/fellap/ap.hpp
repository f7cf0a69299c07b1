#pragma once

// Approximation-property witnesses a: G -> B_e, their bound and defects, and
// the convexification step that merges a convex combination of witnesses into
// one witness supported on disjoint right translates.
//
//   bound(a)       = || sum_r a(r)^* a(r) ||
//   defect(a,t,b)  = || b - sum_r a(tr)^* b a(r) ||

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fellap/fellbundle.hpp"

namespace fellap {

/// Finitely supported map G -> A with A the unit fiber.
class APWitness {
 public:
  APWitness(Group g, FdAlgebra a) : group_(std::move(g)), algebra_(std::move(a)) {}
  explicit APWitness(const FellBundle& b) : APWitness(b.group(), b.unit_algebra()) {}

  const Group& group() const { return group_; }
  const FdAlgebra& algebra() const { return algebra_; }
  const std::map<Elem, FdElement>& values() const { return values_; }

  void set(const Elem& r, FdElement x) {
    group_.check(r);
    if (!x.fits(algebra_)) throw ShapeMismatch("witness value does not fit " + algebra_.describe());
    values_[r] = std::move(x);
  }
  FdElement at(const Elem& r) const {
    auto it = values_.find(r);
    return it == values_.end() ? FdElement::zero(algebra_) : it->second;
  }
  const FdElement* find(const Elem& r) const {
    auto it = values_.find(r);
    return it == values_.end() ? nullptr : &it->second;
  }
  std::vector<Elem> support() const {
    std::vector<Elem> s;
    for (const auto& kv : values_) s.push_back(kv.first);
    return s;
  }

  void check_bundle(const FellBundle& b) const {
    if (b.group() != group_ || b.unit_algebra() != algebra_)
      throw BundleMismatch("witness over " + group_.name() + " " + algebra_.describe() + " does not match bundle " +
                           b.describe());
  }

 private:
  Group group_;
  FdAlgebra algebra_;
  std::map<Elem, FdElement> values_;
};

/// sum_r a(r)^* a(r).
inline FdElement witness_inner(const APWitness& a) {
  FdElement s = FdElement::zero(a.algebra());
  for (const auto& [r, x] : a.values()) s += x.adjoint() * x;
  return s;
}

inline double witness_bound(const APWitness& a) { return op_norm(a.algebra(), witness_inner(a)); }

/// sum_r a(tr)^* b a(r) in B_t.
inline Vector ap_sum(const FellBundle& bundle, const APWitness& a, const Elem& t, const Vector& b) {
  a.check_bundle(bundle);
  bundle.check(t, b);
  const Group& g = bundle.group();
  const Elem e = g.id();
  Vector sum = bundle.zero(t);
  for (const auto& [r, ar] : a.values()) {
    const FdElement* atr = a.find(g.mul(t, r));
    if (!atr) continue;
    const Vector left = bundle.mul(e, bundle.from_unit(atr->adjoint()), t, b);
    sum += bundle.mul(t, left, e, bundle.from_unit(ar));
  }
  return sum;
}

inline double ap_defect(const FellBundle& bundle, const APWitness& a, const Elem& t, const Vector& b) {
  return fiber_norm(bundle, t, b - ap_sum(bundle, a, t, b));
}

/// The same defect computed from the partial action directly:
/// || b - sum_s a(ts)^* alpha_t(alpha_{t^-1}(b) a(s)) || for b in A_t.
inline double ap_defect_partial(const CPartialAction& pa, const APWitness& a, const Elem& t, const FdElement& b,
                                double tol = 1e-12) {
  if (pa.group() != a.group() || pa.algebra() != a.algebra()) throw BundleMismatch("witness does not match action");
  const Group& g = pa.group();
  const FdAlgebra& alg = pa.algebra();
  if (!b.fits(alg)) throw ShapeMismatch("target does not fit " + alg.describe());
  if (pa.domain(t).leakage(b) > tol) throw DomainViolation("target is not in A_t for t=" + g.format(t));
  const Elem tinv = g.inv(t);
  const FdElement pulled = pa.apply(tinv, b);
  FdElement sum = FdElement::zero(alg);
  for (const auto& [s, as] : a.values()) {
    const FdElement* ats = a.find(g.mul(t, s));
    if (!ats) continue;
    sum += ats->adjoint() * pa.apply(t, pulled * as);
  }
  return op_norm(alg, b - sum);
}

/// a(r) = |F|^{-1/2} 1 on F = G.
inline APWitness uniform_witness(const Group& g, const FdAlgebra& a) {
  if (!g.is_finite()) throw Unsupported("uniform witness needs a finite group");
  APWitness w(g, a);
  const FdElement v = FdElement::unit(a) * Complex(1.0 / std::sqrt(static_cast<double>(g.order())));
  for (const auto& r : g.elements()) w.set(r, v);
  return w;
}

/// Normalized indicator of the box {0..N-1}^d in Z^d, or of the whole group
/// when G is finite.
inline APWitness folner_witness(const Group& g, const FdAlgebra& a, int n) {
  if (g.is_finite()) return uniform_witness(g, a);
  if (g.kind() != GroupKind::lattice) throw Unsupported("Folner witness needs a lattice or finite group");
  if (n < 1) throw Error("Folner box side must be >= 1");
  const int d = g.rank();
  std::vector<Elem> box;
  std::vector<int> c(d, 0);
  while (true) {
    box.push_back(g.lattice_point(c));
    int i = 0;
    while (i < d && ++c[i] == n) c[i++] = 0;
    if (i == d) break;
  }
  APWitness w(g, a);
  const FdElement v = FdElement::unit(a) * Complex(1.0 / std::sqrt(static_cast<double>(box.size())));
  for (const auto& r : box) w.set(r, v);
  return w;
}

struct APTarget {
  Elem t;
  Vector b;
  std::string label;
};

/// Basis vectors of every fiber over window(radius), labeled "t#i".
inline std::vector<APTarget> basis_targets(const FellBundle& b, int radius) {
  std::vector<APTarget> out;
  for (const auto& t : window_elements(b.group(), radius)) {
    const int d = b.dim(t);
    for (int i = 0; i < d; ++i) out.push_back({t, Vector::Unit(d, i), b.group().format(t) + "#" + std::to_string(i)});
  }
  return out;
}

struct APRow {
  int index;
  std::string target;
  double bound;
  double defect;
};

struct APVerdict {
  std::vector<APRow> rows;
  /// Targets whose last defect exceeds eps.
  std::vector<std::string> failing;
  /// Indices whose bound exceeds the cap.
  std::vector<int> over_cap;
  bool pass() const { return failing.empty() && over_cap.empty() && !rows.empty(); }
};

/// Tabulates bound and defects for each index of a witness family. A target
/// passes when its defect at the last index is <= eps; the trace itself is
/// reported in full and nothing is extrapolated.
inline APVerdict ap_certify(const std::vector<int>& indices, const std::function<double(int)>& bound,
                            const std::vector<std::string>& labels,
                            const std::function<double(int, std::size_t)>& defect, double eps,
                            double cap = std::numeric_limits<double>::infinity()) {
  APVerdict v;
  for (int i : indices) {
    const double bd = bound(i);
    if (bd > cap) v.over_cap.push_back(i);
    for (std::size_t j = 0; j < labels.size(); ++j) v.rows.push_back({i, labels[j], bd, defect(i, j)});
  }
  if (!indices.empty())
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (!(v.rows[v.rows.size() - labels.size() + j].defect <= eps)) v.failing.push_back(labels[j]);
  return v;
}

/// Witness family a_1, a_2, ... over a bundle.
inline APVerdict ap_certify(const FellBundle& bundle, const std::vector<APWitness>& family,
                            const std::vector<APTarget>& targets, double eps,
                            double cap = std::numeric_limits<double>::infinity()) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < family.size(); ++i) idx.push_back(static_cast<int>(i) + 1);
  std::vector<std::string> labels;
  for (const auto& t : targets) labels.push_back(t.label);
  return ap_certify(
      idx, [&](int i) { return witness_bound(family[i - 1]); }, labels,
      [&](int i, std::size_t j) { return ap_defect(bundle, family[i - 1], targets[j].t, targets[j].b); }, eps, cap);
}

struct ConvexCertificate {
  std::vector<Elem> translates;
  /// max | <a~,a~> - sum_k lambda_k <a_k,a_k> |
  double inner_residual = 0.0;
  /// per target, max | S(a~) - sum_k lambda_k S(a_k) | with S the AP sum
  std::vector<double> sum_residuals;
  double max_residual() const {
    double m = inner_residual;
    for (double r : sum_residuals) m = std::max(m, r);
    return m;
  }
};

/// Given witnesses a_k with weights lambda_k (lambda_k >= 0, sum <= 1) and
/// targets (t_j, b_j), picks r_1, ..., r_m greedily from ball(radius) so that
/// the sets F' r_k are pairwise disjoint, F' = F u t_1^-1 F u ... u t_n^-1 F
/// with F the union of the supports, and returns
///   a~(s) = sum_k lambda_k^{1/2} a_k(s r_k^-1)
/// together with the residuals of the two identities disjointness forces.
inline std::pair<APWitness, ConvexCertificate> convexify(const FellBundle& bundle,
                                                         const std::vector<std::pair<APWitness, double>>& witnesses,
                                                         const std::vector<APTarget>& targets, int radius) {
  const Group& g = bundle.group();
  if (g.is_finite()) throw Unsupported("convexify needs an infinite group");
  if (witnesses.empty()) throw Error("convexify needs at least one witness");
  double total = 0.0;
  for (const auto& [a, lambda] : witnesses) {
    a.check_bundle(bundle);
    if (!(lambda >= 0)) throw Error("convex weights must be nonnegative");
    total += lambda;
  }
  if (total > 1.0 + 1e-12) throw Error("convex weights sum to more than 1");

  std::set<Elem> f;
  for (const auto& wl : witnesses)
    for (const auto& r : wl.first.support()) f.insert(r);
  std::set<Elem> fprime = f;
  for (const auto& tg : targets) {
    const Elem tinv = g.inv(tg.t);
    for (const auto& r : f) fprime.insert(g.mul(tinv, r));
  }

  ConvexCertificate cert;
  std::set<Elem> used;
  for (const auto& r : g.ball(radius)) {
    if (cert.translates.size() == witnesses.size()) break;
    std::vector<Elem> moved;
    bool clash = false;
    for (const auto& x : fprime) {
      moved.push_back(g.mul(x, r));
      if (used.count(moved.back())) {
        clash = true;
        break;
      }
    }
    if (clash) continue;
    used.insert(moved.begin(), moved.end());
    cert.translates.push_back(r);
  }
  if (cert.translates.size() < witnesses.size())
    throw SearchExhausted("found " + std::to_string(cert.translates.size()) + " of " +
                          std::to_string(witnesses.size()) + " disjoint translates within ball(" +
                          std::to_string(radius) + ")");

  APWitness out(bundle);
  for (std::size_t k = 0; k < witnesses.size(); ++k) {
    const auto& [a, lambda] = witnesses[k];
    const Complex c(std::sqrt(lambda), 0.0);
    for (const auto& [s, x] : a.values()) out.set(g.mul(s, cert.translates[k]), c * x);
  }

  FdElement combo = FdElement::zero(bundle.unit_algebra());
  for (const auto& [a, lambda] : witnesses) combo += witness_inner(a) * Complex(lambda);
  cert.inner_residual = distance(witness_inner(out), combo);
  for (const auto& tg : targets) {
    Vector expect = bundle.zero(tg.t);
    for (const auto& [a, lambda] : witnesses) expect += lambda * ap_sum(bundle, a, tg.t, tg.b);
    cert.sum_residuals.push_back(max_abs(ap_sum(bundle, out, tg.t, tg.b) - expect));
  }
  return {std::move(out), cert};
}

/// Heuristic weight fit: minimizes sum_j |b_j - sum_k lambda_k S_k(t_j, b_j)|^2
/// over {lambda >= 0, sum lambda <= 1} by projected gradient descent. This is
/// plumbing for choosing convex weights, not a procedure from the theory.
inline std::vector<double> fit_weights(const FellBundle& bundle, const std::vector<APWitness>& witnesses,
                                       const std::vector<APTarget>& targets, int iterations = 500) {
  const std::size_t m = witnesses.size();
  if (m == 0) return {};
  Eigen::Index rows = 0;
  for (const auto& tg : targets) rows += tg.b.size();
  Matrix s(rows, static_cast<Eigen::Index>(m));
  Vector rhs(rows);
  Eigen::Index off = 0;
  for (const auto& tg : targets) {
    rhs.segment(off, tg.b.size()) = tg.b;
    for (std::size_t k = 0; k < m; ++k)
      s.block(off, static_cast<Eigen::Index>(k), tg.b.size(), 1) = ap_sum(bundle, witnesses[k], tg.t, tg.b);
    off += tg.b.size();
  }
  const Eigen::MatrixXd gram = (s.adjoint() * s).real();
  const Eigen::VectorXd lin = (s.adjoint() * rhs).real();
  const double lip = std::max(gram.selfadjointView<Eigen::Lower>().operatorNorm(), 1e-12);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
  auto project = [](Eigen::VectorXd y) {
    y = y.cwiseMax(0.0);
    if (y.sum() <= 1.0) return y;
    // Euclidean projection onto the simplex sum = 1.
    std::vector<double> u(y.data(), y.data() + y.size());
    std::sort(u.rbegin(), u.rend());
    double acc = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      acc += u[i];
      const double cand = (acc - 1.0) / static_cast<double>(i + 1);
      if (u[i] - cand > 0) theta = cand;
    }
    return Eigen::VectorXd((y.array() - theta).cwiseMax(0.0));
  };
  for (int it = 0; it < iterations; ++it) x = project(x - (gram * x - lin) / lip);
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace fellap
