#pragma once

// Kernels of a Fell bundle: finitely supported (s,t) -> k(s,t) in B_{st^-1}.
//
//   (h * k)(r,s) = sum_t k(r,t) h(t,s)      k^*(r,s) = k(s,r)^*
//   beta_t(k)(r,s) = k(rt, st)              pi(k)f(s) = sum_t k(s,t) f(t)
//
// With this product pi reverses order: pi(h * k) = pi(k) pi(h), and
// (h * k)^* = k^* * h^*.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fellap/fellbundle.hpp"

namespace fellap {

class Kernel {
 public:
  using Key = std::pair<Elem, Elem>;

  explicit Kernel(FellBundle b) : bundle_(std::move(b)) {}

  const FellBundle& bundle() const { return bundle_; }
  const std::map<Key, Vector>& entries() const { return entries_; }

  /// Fiber index s t^-1 of entry (s,t).
  Elem fiber(const Elem& s, const Elem& t) const { return bundle_.group().mul(s, bundle_.group().inv(t)); }

  void set(const Elem& s, const Elem& t, Vector v) {
    bundle_.check(fiber(s, t), v);
    entries_[{s, t}] = std::move(v);
  }
  void add(const Elem& s, const Elem& t, const Vector& v) {
    auto it = entries_.find({s, t});
    if (it == entries_.end())
      set(s, t, v);
    else
      it->second += v;
  }
  Vector at(const Elem& s, const Elem& t) const {
    auto it = entries_.find({s, t});
    return it == entries_.end() ? bundle_.zero(fiber(s, t)) : it->second;
  }

  /// Unit of B_e on the diagonal of F.
  static Kernel identity_on(const FellBundle& b, const std::vector<Elem>& window) {
    Kernel k(b);
    const Vector unit = b.from_unit(FdElement::unit(b.unit_algebra()));
    for (const auto& t : window) k.set(t, t, unit);
    return k;
  }

  /// Single entry b at (s,t).
  static Kernel single(const FellBundle& b, const Elem& s, const Elem& t, const Vector& v) {
    Kernel k(b);
    k.set(s, t, v);
    return k;
  }

 private:
  FellBundle bundle_;
  std::map<Key, Vector> entries_;
};

/// Max coordinate difference over the union of supports.
inline double kernel_distance(const Kernel& a, const Kernel& b) {
  same_bundle(a.bundle(), b.bundle());
  double m = 0.0;
  for (const auto& [key, v] : a.entries()) m = std::max(m, max_abs(v - b.at(key.first, key.second)));
  for (const auto& [key, v] : b.entries()) m = std::max(m, max_abs(v - a.at(key.first, key.second)));
  return m;
}

inline Kernel kernel_sum(const Kernel& a, const Kernel& b, Complex scale = 1.0) {
  same_bundle(a.bundle(), b.bundle());
  Kernel out = a;
  for (const auto& [key, v] : b.entries()) out.add(key.first, key.second, scale * v);
  return out;
}

/// (h * k)(r,s) = sum_t k(r,t) h(t,s).
inline Kernel k_mul(const Kernel& h, const Kernel& k) {
  same_bundle(h.bundle(), k.bundle());
  const FellBundle& b = h.bundle();
  std::map<Elem, std::vector<std::pair<Elem, const Vector*>>> rows_of_h;  // t -> [(s, h(t,s))]
  for (const auto& [key, v] : h.entries()) rows_of_h[key.first].emplace_back(key.second, &v);
  Kernel out(b);
  for (const auto& [key, kv] : k.entries()) {
    const auto& [r, t] = key;
    auto it = rows_of_h.find(t);
    if (it == rows_of_h.end()) continue;
    for (const auto& [s, hv] : it->second) out.add(r, s, b.mul(k.fiber(r, t), kv, k.fiber(t, s), *hv));
  }
  return out;
}

/// k^*(r,s) = k(s,r)^*.
inline Kernel k_star(const Kernel& k) {
  const FellBundle& b = k.bundle();
  Kernel out(b);
  for (const auto& [key, v] : k.entries()) out.set(key.second, key.first, b.star(k.fiber(key.first, key.second), v));
  return out;
}

/// (sum_{s,t} ||k(s,t)||^2)^{1/2} with fiber norms.
inline double norm2(const Kernel& k) {
  double s = 0.0;
  for (const auto& [key, v] : k.entries()) {
    const double n = fiber_norm(k.bundle(), k.fiber(key.first, key.second), v);
    s += n * n;
  }
  return std::sqrt(s);
}

/// beta_t(k)(r,s) = k(rt, st): entry (r', s') moves to (r' t^-1, s' t^-1).
inline Kernel beta_act(const Elem& t, const Kernel& k) {
  const Group& g = k.bundle().group();
  const Elem tinv = g.inv(t);
  Kernel out(k.bundle());
  for (const auto& [key, v] : k.entries()) out.set(g.mul(key.first, tinv), g.mul(key.second, tinv), v);
  return out;
}

/// k_{xi,eta}(s,t) = xi(s) eta(t)^*.
inline Kernel rank_one(const FellSection& xi, const FellSection& eta) {
  same_bundle(xi.bundle(), eta.bundle());
  const FellBundle& b = xi.bundle();
  const Group& g = b.group();
  Kernel out(b);
  for (const auto& [s, x] : xi.values())
    for (const auto& [t, y] : eta.values()) out.set(s, t, b.mul(s, x, g.inv(t), b.star(t, y)));
  return out;
}

/// pi(k) f (s) = sum_t k(s,t) f(t).
inline FellSection kernel_apply(const Kernel& k, const FellSection& f) {
  same_bundle(k.bundle(), f.bundle());
  const FellBundle& b = k.bundle();
  FellSection out(b);
  for (const auto& [key, v] : k.entries()) {
    auto it = f.values().find(key.second);
    if (it == f.values().end()) continue;
    out.add(key.first, b.mul(k.fiber(key.first, key.second), v, key.second, it->second));
  }
  return out;
}

/// Ordered finite window F = {t_1, ..., t_n} of distinct elements.
class WindowF {
 public:
  WindowF(const Group& g, std::vector<Elem> elems) : elems_(std::move(elems)) {
    std::set<Elem> seen;
    for (const auto& t : elems_) {
      g.check(t);
      if (!seen.insert(t).second) throw Error("window repeats element " + g.format(t));
    }
  }
  static WindowF ball(const Group& g, int radius) { return WindowF(g, window_elements(g, radius)); }

  const std::vector<Elem>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool contains(const Elem& t) const { return std::find(elems_.begin(), elems_.end(), t) != elems_.end(); }
  int position(const Elem& t) const {
    auto it = std::find(elems_.begin(), elems_.end(), t);
    return it == elems_.end() ? -1 : static_cast<int>(it - elems_.begin());
  }

 private:
  std::vector<Elem> elems_;
};

/// Kernel supported in F x F as an n x n matrix; entry (i,j) lies in B_{t_i t_j^-1}.
struct MFMatrix {
  WindowF window;
  std::vector<std::vector<Vector>> entries;
};

inline MFMatrix to_MF(const Kernel& k, const WindowF& f) {
  for (const auto& [key, v] : k.entries())
    if (!f.contains(key.first) || !f.contains(key.second))
      throw DomainViolation("kernel entry (" + k.bundle().group().format(key.first) + "," +
                            k.bundle().group().format(key.second) + ") lies outside F x F");
  MFMatrix m{f, {}};
  for (const auto& s : f.elements()) {
    std::vector<Vector> row;
    for (const auto& t : f.elements()) row.push_back(k.at(s, t));
    m.entries.push_back(std::move(row));
  }
  return m;
}

/// Compression 1_F k 1_F.
inline Kernel compress(const Kernel& k, const WindowF& f) {
  Kernel out(k.bundle());
  for (const auto& [key, v] : k.entries())
    if (f.contains(key.first) && f.contains(key.second)) out.set(key.first, key.second, v);
  return out;
}

/// dim M_F(B) = sum over s,t in F of dim B_{st^-1}.
inline long mf_dimension(const FellBundle& b, const WindowF& f) {
  const Group& g = b.group();
  long d = 0;
  for (const auto& s : f.elements())
    for (const auto& t : f.elements()) d += b.dim(g.mul(s, g.inv(t)));
  return d;
}

/// Operator norm of 1_F pi(k) 1_F on (sum_{t in F} B_t) (x)_{B_e} C^D, where
/// B_e acts on C^D through its block-diagonal representation. The space is
/// presented by generators x_a (x) e_i with Gram matrix (x_a^* x_b)_{ij};
/// the norm is that of L^{1/2} V^* T V L^{-1/2} on the positive eigenspace.
/// For infinite groups this is the norm of a compression, hence a lower
/// bound for the norm of pi(k) on all of l^2(B).
inline double MF_embed_norm(const Kernel& k, const WindowF& f) {
  const FellBundle& b = k.bundle();
  const Group& g = b.group();
  const int D = b.unit_algebra().rep_dim();
  std::vector<Eigen::Index> offset;
  Eigen::Index n = 0;
  for (const auto& t : f.elements()) {
    offset.push_back(n);
    n += b.dim(t);
  }
  if (n == 0 || D == 0) return 0.0;

  Matrix gram = Matrix::Zero(n * D, n * D);
  for (std::size_t w = 0; w < f.size(); ++w) {
    const Elem& t = f.elements()[w];
    const Elem tinv = g.inv(t);
    const int d = b.dim(t);
    for (int a = 0; a < d; ++a) {
      const Vector xa_star = b.star(t, Vector::Unit(d, a));
      for (int c = 0; c < d; ++c) {
        const Matrix block = b.to_unit(b.mul(tinv, xa_star, t, Vector::Unit(d, c))).block_diagonal();
        gram.block((offset[w] + a) * D, (offset[w] + c) * D, D, D) = block;
      }
    }
  }

  Matrix small = Matrix::Zero(n, n);
  for (const auto& [key, v] : k.entries()) {
    const int i = f.position(key.first);
    const int j = f.position(key.second);
    if (i < 0 || j < 0) continue;
    const Elem fib = k.fiber(key.first, key.second);
    const int dt = b.dim(key.second);
    for (int c = 0; c < dt; ++c)
      small.block(offset[i], offset[j] + c, b.dim(key.first), 1) += b.mul(fib, v, key.second, Vector::Unit(dt, c));
  }
  Matrix op = Matrix::Zero(n * D, n * D);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (small(i, j) != Complex(0.0)) op.block(i * D, j * D, D, D) = small(i, j) * Matrix::Identity(D, D);

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram + gram.adjoint()));
  const double top = es.eigenvalues().maxCoeff();
  if (top <= 0) return 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-10 * top) keep.push_back(i);
  Matrix v(n * D, static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd root(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    v.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
    root(static_cast<Eigen::Index>(c)) = std::sqrt(es.eigenvalues()(keep[c]));
  }
  const Matrix inner = root.asDiagonal() * (v.adjoint() * op * v) * root.cwiseInverse().asDiagonal();
  return spectral_norm(inner);
}

/// A conditional expectation onto a sub-bundle N, given fiberwise by
/// idempotent linear maps P_t on coordinates (image N_t).
class FiberExpectation {
 public:
  using Map = std::function<Matrix(const Elem&)>;

  FiberExpectation(FellBundle b, Map p, std::string name) : bundle_(std::move(b)), p_(std::move(p)), name_(std::move(name)) {}

  const FellBundle& bundle() const { return bundle_; }
  const std::string& name() const { return name_; }
  Matrix matrix(const Elem& t) const { return p_(t); }
  Vector apply(const Elem& t, const Vector& x) const { return p_(t) * x; }

  /// Runs `check` once per expectation (copies share the result).
  template <typename Check>
  void ensure_valid(Check check) const {
    std::call_once(state_->once, [&] { state_->report = std::make_shared<Report>(check()); });
    if (!state_->report->ok())
      throw ValidationError("conditional expectation '" + name_ + "' violates its laws", *state_->report);
  }

  /// P = id.
  static FiberExpectation identity(const FellBundle& b) {
    return FiberExpectation(b, [b](const Elem& t) { return Matrix(Matrix::Identity(b.dim(t), b.dim(t))); }, "identity");
  }

  /// N_t = B_t for t in the subgroup H and 0 elsewhere.
  static FiberExpectation subgroup(const FellBundle& b, std::vector<Elem> h) {
    if (!is_subgroup(b.group(), h)) throw Error("subgroup expectation: not a subgroup");
    std::set<Elem> hs(h.begin(), h.end());
    return FiberExpectation(
        b,
        [b, hs](const Elem& t) {
          const int d = b.dim(t);
          return hs.count(t) ? Matrix(Matrix::Identity(d, d)) : Matrix(Matrix::Zero(d, d));
        },
        "subgroup");
  }

  /// For a bundle whose fibers are ideals of a block algebra in row-major
  /// coordinates: keep the diagonal entries of every block.
  static FiberExpectation block_diagonal(const FellBundle& b, std::function<Ideal(const Elem&)> fiber_ideal) {
    const FdAlgebra a = b.unit_algebra();
    return FiberExpectation(
        b,
        [b, a, fiber_ideal](const Elem& t) {
          const int d = b.dim(t);
          Matrix p = Matrix::Zero(d, d);
          Eigen::Index k = 0;
          for (int j : fiber_ideal(t).blocks) {
            const int n = a.block_dim(j);
            for (int r = 0; r < n; ++r)
              for (int c = 0; c < n; ++c, ++k)
                if (r == c) p(k, k) = 1.0;
          }
          return p;
        },
        "block-diagonal");
  }

 private:
  FellBundle bundle_;
  Map p_;
  std::string name_;
  struct State {
    std::once_flag once;
    std::shared_ptr<Report> report;
  };
  std::shared_ptr<State> state_ = std::make_shared<State>();
};

/// Samples the laws a conditional expectation onto a sub-bundle must obey:
/// idempotence, P_gh(b a) = P_g(b) a and P_hg(a b) = a P_g(b) for a in N_h,
/// P_{g^-1}(b^*) = P_g(b)^*, and closure of N under products.
inline Report validate_expectation(const FiberExpectation& p, int radius, int samples, std::uint64_t seed = 0,
                                   double tol = 1e-10) {
  Report rep(tol);
  const FellBundle& b = p.bundle();
  const Group& g = b.group();
  const auto elems = window_elements(g, radius);
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
  for (int n = 0; n < samples; ++n) {
    const Elem& s = elems[pick(rng)];
    const Elem& h = elems[pick(rng)];
    const std::string w = "g=" + g.format(s) + " h=" + g.format(h);
    const Matrix ps = p.matrix(s);
    rep.record("idempotent", max_abs(ps * ps - ps), w);
    const Vector x = random_vector(rng, b.dim(s));
    const Vector a = p.apply(h, random_vector(rng, b.dim(h)));
    rep.record("right-module", max_abs(p.apply(g.mul(s, h), b.mul(s, x, h, a)) - b.mul(s, p.apply(s, x), h, a)), w);
    rep.record("left-module", max_abs(p.apply(g.mul(h, s), b.mul(h, a, s, x)) - b.mul(h, a, s, p.apply(s, x))), w);
    rep.record("star", max_abs(p.apply(g.inv(s), b.star(s, x)) - b.star(s, p.apply(s, x))), w);
    const Vector y = p.apply(s, x);
    const Vector prod = b.mul(s, y, h, a);
    rep.record("subbundle", max_abs(p.apply(g.mul(s, h), prod) - prod), w);
  }
  return rep;
}

/// Entrywise P over F x F after compressing k to F x F. The laws of P are
/// sampled on window(1) first; a violation throws ValidationError.
inline Kernel cond_expectation_PF(const FiberExpectation& p, const Kernel& k, const WindowF& f) {
  same_bundle(p.bundle(), k.bundle());
  p.ensure_valid([&p] { return validate_expectation(p, 1, 40); });
  Kernel out(k.bundle());
  for (const auto& [key, v] : k.entries())
    if (f.contains(key.first) && f.contains(key.second))
      out.set(key.first, key.second, p.apply(k.fiber(key.first, key.second), v));
  return out;
}

/// Kernel with independent random entries on a random subset of F x F.
inline Kernel random_kernel(const FellBundle& b, const WindowF& f, Rng& rng, double density = 0.5) {
  std::bernoulli_distribution keep(density);
  Kernel k(b);
  const Group& g = b.group();
  for (const auto& s : f.elements())
    for (const auto& t : f.elements())
      if (keep(rng)) k.set(s, t, random_vector(rng, b.dim(g.mul(s, g.inv(t)))));
  return k;
}

}  // namespace fellap
