#pragma once

// Finite-dimensional C*-algebras as direct sums of full matrix blocks, their
// ideals, *-isomorphisms between ideals, and C*-partial actions built from them.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fellap/errors.hpp"
#include "fellap/group.hpp"
#include "fellap/linalg.hpp"
#include "fellap/report.hpp"

namespace fellap {

/// Direct sum of matrix algebras M_{d_1} + ... + M_{d_m}. An empty block list is
/// the zero algebra.
class FdAlgebra {
 public:
  FdAlgebra() = default;
  explicit FdAlgebra(std::vector<int> blocks) : blocks_(std::move(blocks)) {
    for (int d : blocks_)
      if (d < 1) throw ShapeMismatch("block dimensions must be positive");
  }

  /// C^m: m one-dimensional blocks.
  static FdAlgebra commutative(int m) { return FdAlgebra(std::vector<int>(m, 1)); }

  const std::vector<int>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_dim(int j) const { return blocks_.at(j); }

  /// Vector-space dimension, sum of d_j^2.
  int dim() const {
    int s = 0;
    for (int d : blocks_) s += d * d;
    return s;
  }
  /// Dimension of the defining block-diagonal representation, sum of d_j.
  int rep_dim() const {
    int s = 0;
    for (int d : blocks_) s += d;
    return s;
  }
  bool is_commutative() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](int d) { return d == 1; });
  }

  friend bool operator==(const FdAlgebra& a, const FdAlgebra& b) { return a.blocks_ == b.blocks_; }
  friend bool operator!=(const FdAlgebra& a, const FdAlgebra& b) { return !(a == b); }

  std::string describe() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < blocks_.size(); ++i) os << (i ? "," : "") << blocks_[i];
    os << "]";
    return os.str();
  }

 private:
  std::vector<int> blocks_;
};

/// An element of an FdAlgebra: one square matrix per block.
struct FdElement {
  std::vector<Matrix> blocks;

  static FdElement zero(const FdAlgebra& a) {
    FdElement x;
    for (int d : a.blocks()) x.blocks.push_back(Matrix::Zero(d, d));
    return x;
  }
  static FdElement unit(const FdAlgebra& a) {
    FdElement x;
    for (int d : a.blocks()) x.blocks.push_back(Matrix::Identity(d, d));
    return x;
  }
  static FdElement random(const FdAlgebra& a, Rng& rng) {
    FdElement x;
    for (int d : a.blocks()) x.blocks.push_back(random_matrix(rng, d, d));
    return x;
  }
  /// Matrix unit E_{row,col} of block j.
  static FdElement matrix_unit(const FdAlgebra& a, int j, int row, int col) {
    FdElement x = zero(a);
    x.blocks.at(j)(row, col) = 1.0;
    return x;
  }

  bool fits(const FdAlgebra& a) const {
    if (static_cast<int>(blocks.size()) != a.block_count()) return false;
    for (int j = 0; j < a.block_count(); ++j)
      if (blocks[j].rows() != a.block_dim(j) || blocks[j].cols() != a.block_dim(j)) return false;
    return true;
  }

  FdElement adjoint() const {
    FdElement y;
    for (const auto& b : blocks) y.blocks.push_back(b.adjoint());
    return y;
  }

  FdElement& operator+=(const FdElement& o) {
    same_shape(o);
    for (std::size_t j = 0; j < blocks.size(); ++j) blocks[j] += o.blocks[j];
    return *this;
  }
  FdElement& operator-=(const FdElement& o) {
    same_shape(o);
    for (std::size_t j = 0; j < blocks.size(); ++j) blocks[j] -= o.blocks[j];
    return *this;
  }
  FdElement& operator*=(Complex c) {
    for (auto& b : blocks) b *= c;
    return *this;
  }
  friend FdElement operator+(FdElement a, const FdElement& b) { return a += b; }
  friend FdElement operator-(FdElement a, const FdElement& b) { return a -= b; }
  friend FdElement operator*(FdElement a, Complex c) { return a *= c; }
  friend FdElement operator*(Complex c, FdElement a) { return a *= c; }
  friend FdElement operator*(const FdElement& a, const FdElement& b) {
    a.same_shape(b);
    FdElement y;
    for (std::size_t j = 0; j < a.blocks.size(); ++j) y.blocks.push_back(a.blocks[j] * b.blocks[j]);
    return y;
  }

  /// Max entrywise |x - y|.
  friend double distance(const FdElement& a, const FdElement& b) {
    a.same_shape(b);
    double m = 0.0;
    for (std::size_t j = 0; j < a.blocks.size(); ++j) m = std::max(m, max_abs(a.blocks[j] - b.blocks[j]));
    return m;
  }

  /// Block-diagonal matrix of the defining representation.
  Matrix block_diagonal() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.rows();
    Matrix m = Matrix::Zero(n, n);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      m.block(off, off, b.rows(), b.cols()) = b;
      off += b.rows();
    }
    return m;
  }

 private:
  void same_shape(const FdElement& o) const {
    if (o.blocks.size() != blocks.size()) throw ShapeMismatch("elements of different algebras");
    for (std::size_t j = 0; j < blocks.size(); ++j)
      if (o.blocks[j].rows() != blocks[j].rows()) throw ShapeMismatch("elements of different algebras");
  }
};

/// C*-norm: the largest singular value over all blocks.
inline double op_norm(const FdAlgebra& a, const FdElement& x) {
  if (!x.fits(a)) throw ShapeMismatch("element does not fit algebra " + a.describe());
  double m = 0.0;
  for (const auto& b : x.blocks) m = std::max(m, spectral_norm(b));
  return m;
}

/// Block-unit projections p_j; they span the center.
inline std::vector<FdElement> center_basis(const FdAlgebra& a) {
  std::vector<FdElement> out;
  for (int j = 0; j < a.block_count(); ++j) {
    FdElement p = FdElement::zero(a);
    p.blocks[j].setIdentity();
    out.push_back(std::move(p));
  }
  return out;
}

/// Smallest eigenvalue over blocks of the Hermitian part, and the
/// anti-Hermitian residual; used as positivity certificate.
inline std::pair<double, double> positivity_defect(const FdElement& x) {
  double min_eig = 0.0;
  double herm = 0.0;
  bool first = true;
  for (const auto& b : x.blocks) {
    if (b.size() == 0) continue;
    herm = std::max(herm, max_abs(b - b.adjoint()));
    const Matrix h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const double e = es.eigenvalues().minCoeff();
    min_eig = first ? e : std::min(min_eig, e);
    first = false;
  }
  return {min_eig, herm};
}

/// Closed two-sided ideal: a sorted set of block indices.
struct Ideal {
  std::vector<int> blocks;

  Ideal() = default;
  explicit Ideal(std::vector<int> b) : blocks(std::move(b)) {
    std::sort(blocks.begin(), blocks.end());
    blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  }
  static Ideal whole(const FdAlgebra& a) {
    std::vector<int> b(a.block_count());
    for (int j = 0; j < a.block_count(); ++j) b[j] = j;
    return Ideal(std::move(b));
  }

  bool contains(int j) const { return std::binary_search(blocks.begin(), blocks.end(), j); }
  bool empty() const { return blocks.empty(); }
  std::size_t size() const { return blocks.size(); }
  /// Position of block j inside this ideal, or -1.
  int local_index(int j) const {
    auto it = std::lower_bound(blocks.begin(), blocks.end(), j);
    return (it != blocks.end() && *it == j) ? static_cast<int>(it - blocks.begin()) : -1;
  }

  friend Ideal operator&(const Ideal& a, const Ideal& b) {
    std::vector<int> r;
    std::set_intersection(a.blocks.begin(), a.blocks.end(), b.blocks.begin(), b.blocks.end(),
                          std::back_inserter(r));
    return Ideal(std::move(r));
  }
  friend bool operator==(const Ideal& a, const Ideal& b) { return a.blocks == b.blocks; }
  friend bool operator!=(const Ideal& a, const Ideal& b) { return !(a == b); }
  bool subset_of(const Ideal& o) const {
    return std::includes(o.blocks.begin(), o.blocks.end(), blocks.begin(), blocks.end());
  }

  /// The ideal as an algebra in its own right.
  FdAlgebra as_algebra(const FdAlgebra& a) const {
    std::vector<int> d;
    for (int j : blocks) d.push_back(a.block_dim(j));
    return FdAlgebra(std::move(d));
  }

  /// Unit projection 1_I.
  FdElement unit(const FdAlgebra& a) const {
    FdElement x = FdElement::zero(a);
    for (int j : blocks) x.blocks[j].setIdentity();
    return x;
  }

  /// Max entry of x outside the ideal.
  double leakage(const FdElement& x) const {
    double m = 0.0;
    for (std::size_t j = 0; j < x.blocks.size(); ++j)
      if (!contains(static_cast<int>(j))) m = std::max(m, max_abs(x.blocks[j]));
    return m;
  }

  /// x * 1_I.
  FdElement cut(const FdElement& x) const {
    FdElement y = x;
    for (std::size_t j = 0; j < y.blocks.size(); ++j)
      if (!contains(static_cast<int>(j))) y.blocks[j].setZero();
    return y;
  }

  int dim(const FdAlgebra& a) const {
    int s = 0;
    for (int j : blocks) s += a.block_dim(j) * a.block_dim(j);
    return s;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < blocks.size(); ++i) os << (i ? "," : "") << blocks[i];
    os << "}";
    return os.str();
  }
};

/// Coordinates of the part of x living in the blocks of `ideal`: blocks in
/// ascending order, each row-major. This is the basis used for every fiber
/// that is an ideal of a block algebra.
inline Vector ideal_coords(const FdAlgebra& a, const Ideal& ideal, const FdElement& x) {
  if (!x.fits(a)) throw ShapeMismatch("element does not fit algebra " + a.describe());
  Vector v(ideal.dim(a));
  Eigen::Index k = 0;
  for (int j : ideal.blocks) {
    const Matrix& b = x.blocks[j];
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (Eigen::Index c = 0; c < b.cols(); ++c) v(k++) = b(r, c);
  }
  return v;
}

inline FdElement ideal_element(const FdAlgebra& a, const Ideal& ideal, const Vector& v) {
  if (v.size() != ideal.dim(a)) throw ShapeMismatch("coordinate vector has the wrong length");
  FdElement x = FdElement::zero(a);
  Eigen::Index k = 0;
  for (int j : ideal.blocks) {
    Matrix& b = x.blocks[j];
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = v(k++);
  }
  return x;
}

/// *-isomorphism between ideals: block j of the source goes to block image[k]
/// (j = source.blocks[k]) by x -> U_k x U_k^*.
struct IdealIso {
  Ideal source;
  Ideal target;
  std::vector<int> image;
  std::vector<Matrix> unitaries;

  static IdealIso zero() { return {}; }

  static IdealIso identity(const FdAlgebra& a) { return identity_on(a, Ideal::whole(a)); }

  static IdealIso identity_on(const FdAlgebra& a, const Ideal& ideal) {
    IdealIso f;
    f.source = ideal;
    f.target = ideal;
    for (int j : ideal.blocks) {
      f.image.push_back(j);
      f.unitaries.push_back(Matrix::Identity(a.block_dim(j), a.block_dim(j)));
    }
    return f;
  }

  /// Builds and checks an isomorphism from a block map and unitaries.
  static IdealIso make(const FdAlgebra& a, std::vector<int> src, std::vector<int> img,
                       std::vector<Matrix> us) {
    if (src.size() != img.size() || src.size() != us.size())
      throw ShapeMismatch("ideal isomorphism: block map and unitaries disagree in length");
    std::vector<std::size_t> order(src.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return src[x] < src[y]; });
    IdealIso f;
    for (std::size_t k : order) {
      const int j = src[k];
      const int t = img[k];
      if (j < 0 || j >= a.block_count() || t < 0 || t >= a.block_count())
        throw ShapeMismatch("ideal isomorphism: block index out of range");
      if (a.block_dim(j) != a.block_dim(t))
        throw ShapeMismatch("ideal isomorphism: blocks " + std::to_string(j) + " and " +
                            std::to_string(t) + " differ in dimension");
      if (us[k].rows() != a.block_dim(j) || us[k].cols() != a.block_dim(j))
        throw ShapeMismatch("ideal isomorphism: unitary has the wrong size");
      if (unitarity_defect(us[k]) > 1e-9) throw ShapeMismatch("ideal isomorphism: matrix is not unitary");
      f.source.blocks.push_back(j);
      f.image.push_back(t);
      f.unitaries.push_back(us[k]);
    }
    f.target = Ideal(img);
    if (f.target.size() != f.source.size()) throw ShapeMismatch("ideal isomorphism: block map is not injective");
    if (Ideal(f.source.blocks).size() != f.source.size())
      throw ShapeMismatch("ideal isomorphism: repeated source block");
    return f;
  }

  /// Image block of source block j, or -1.
  int map_block(int j) const {
    const int k = source.local_index(j);
    return k < 0 ? -1 : image[k];
  }
  const Matrix& unitary_of(int j) const { return unitaries.at(source.local_index(j)); }

  /// Applies the isomorphism to x * 1_source.
  FdElement apply(const FdAlgebra& a, const FdElement& x) const {
    if (!x.fits(a)) throw ShapeMismatch("element does not fit algebra " + a.describe());
    FdElement y = FdElement::zero(a);
    for (std::size_t k = 0; k < source.blocks.size(); ++k)
      y.blocks[image[k]] = unitaries[k] * x.blocks[source.blocks[k]] * unitaries[k].adjoint();
    return y;
  }

  /// Like apply, but refuses arguments with mass outside the source ideal.
  FdElement apply_strict(const FdAlgebra& a, const FdElement& x, double tol = 1e-12) const {
    if (source.leakage(x) > tol) throw DomainViolation("argument is not in the domain ideal " + source.describe());
    return apply(a, x);
  }

  IdealIso inverse() const {
    IdealIso f;
    std::vector<std::size_t> order(image.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return image[x] < image[y]; });
    for (std::size_t k : order) {
      f.source.blocks.push_back(image[k]);
      f.image.push_back(source.blocks[k]);
      f.unitaries.push_back(unitaries[k].adjoint());
    }
    f.target = source;
    return f;
  }

  /// Restriction to a sub-ideal of the source.
  IdealIso restricted_to(const Ideal& dom) const {
    IdealIso f;
    for (std::size_t k = 0; k < source.blocks.size(); ++k)
      if (dom.contains(source.blocks[k])) {
        f.source.blocks.push_back(source.blocks[k]);
        f.image.push_back(image[k]);
        f.unitaries.push_back(unitaries[k]);
      }
    f.target = Ideal(f.image);
    return f;
  }
};

/// Max discrepancy between two isomorphisms as maps: 1 if the block data
/// differ, otherwise the largest phase-aligned unitary difference.
inline double iso_distance(const IdealIso& f, const IdealIso& g) {
  if (f.source != g.source || f.image != g.image) return 1.0;
  double m = 0.0;
  for (std::size_t k = 0; k < f.unitaries.size(); ++k) m = std::max(m, phase_distance(f.unitaries[k], g.unitaries[k]));
  return m;
}

/// A family t -> alpha_t of ideal isomorphisms over a group. Whether the
/// family satisfies the partial-action axioms is decided by
/// validate_partial_action; twisted constructions reuse the type for families
/// that only compose up to a cocycle.
class CPartialAction {
 public:
  using Generator = std::function<IdealIso(const Elem&)>;

  CPartialAction(Group group, FdAlgebra algebra, Generator gen)
      : group_(std::move(group)), algebra_(std::move(algebra)), state_(std::make_shared<State>()) {
    state_->gen = std::move(gen);
  }

  const Group& group() const { return group_; }
  const FdAlgebra& algebra() const { return algebra_; }

  /// alpha_t : A_{t^-1} -> A_t. Memoized; safe for concurrent readers.
  const IdealIso& iso(const Elem& t) const {
    group_.check(t);
    std::lock_guard<std::mutex> lock(state_->mu);
    auto it = state_->cache.find(t);
    if (it == state_->cache.end()) it = state_->cache.emplace(t, state_->gen(t)).first;
    return it->second;
  }

  /// A_t, the range ideal of alpha_t.
  const Ideal& domain(const Elem& t) const { return iso(t).target; }

  FdElement apply(const Elem& t, const FdElement& x) const { return iso(t).apply(algebra_, x); }

  /// Explicit table; elements missing from the table act by the zero map.
  static CPartialAction from_table(Group g, FdAlgebra a, std::map<Elem, IdealIso> table) {
    for (const auto& [t, f] : table) g.check(t);
    auto shared = std::make_shared<const std::map<Elem, IdealIso>>(std::move(table));
    return CPartialAction(std::move(g), std::move(a), [shared](const Elem& t) {
      auto it = shared->find(t);
      return it == shared->end() ? IdealIso::zero() : it->second;
    });
  }

  /// Global action determined by automorphisms for the free generators (free
  /// group) or commuting automorphisms for the basis vectors (lattice).
  static CPartialAction from_generators(Group g, FdAlgebra a, std::vector<IdealIso> gens) {
    if (g.is_finite()) throw Unsupported("finite groups need an explicit action table");
    if (static_cast<int>(gens.size()) != g.rank())
      throw ShapeMismatch("need one automorphism per generator");
    const Ideal all = Ideal::whole(a);
    for (const auto& f : gens)
      if (f.source != all || f.target != all) throw ShapeMismatch("generator maps must be automorphisms");
    if (g.kind() == GroupKind::lattice) {
      for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
          if (iso_distance(compose(gens[i], gens[j]), compose(gens[j], gens[i])) > 1e-10)
            throw Error("lattice generator automorphisms do not commute");
    }
    std::vector<IdealIso> letters;
    for (const auto& f : gens) {
      letters.push_back(f);
      letters.push_back(f.inverse());
    }
    return CPartialAction(g, a, [g, a, letters](const Elem& t) {
      IdealIso acc = IdealIso::identity(a);
      if (g.kind() == GroupKind::free) {
        for (auto it = t.code.rbegin(); it != t.code.rend(); ++it) acc = compose(letters[*it], acc);
      } else {
        for (std::size_t i = 0; i < t.code.size(); ++i) {
          const IdealIso& step = letters[2 * i + (t.code[i] < 0 ? 1 : 0)];
          for (int k = 0; k < std::abs(t.code[i]); ++k) acc = compose(step, acc);
        }
      }
      return acc;
    });
  }

  /// Every alpha_t is the identity of A.
  static CPartialAction identity_action(Group g, FdAlgebra a) {
    IdealIso id = IdealIso::identity(a);
    return CPartialAction(std::move(g), std::move(a), [id](const Elem&) { return id; });
  }

  /// The partial action on C in which every ideal is zero except A_e.
  static CPartialAction trivial(Group g) {
    FdAlgebra c({1});
    IdealIso id = IdealIso::identity(c);
    Elem e = g.id();
    return CPartialAction(std::move(g), std::move(c),
                          [id, e](const Elem& t) { return t == e ? id : IdealIso::zero(); });
  }

  /// Global action of a subgroup H extended by zero: alpha_h = action(h) for
  /// h in H and the zero map elsewhere.
  static CPartialAction extend_by_zero(Group g, const std::vector<Elem>& subgroup, const CPartialAction& action) {
    if (!is_subgroup(g, subgroup)) throw Error("extend_by_zero: not a subgroup");
    std::set<Elem> h(subgroup.begin(), subgroup.end());
    FdAlgebra a = action.algebra();
    return CPartialAction(std::move(g), std::move(a), [h, action](const Elem& t) {
      return h.count(t) ? action.iso(t) : IdealIso::zero();
    });
  }

  /// g o f on the largest domain where it is defined: {x in dom f : f(x) in dom g}.
  static IdealIso compose(const IdealIso& g, const IdealIso& f) {
    IdealIso h;
    for (std::size_t k = 0; k < f.source.blocks.size(); ++k) {
      const int mid = f.image[k];
      const int kg = g.source.local_index(mid);
      if (kg < 0) continue;
      h.source.blocks.push_back(f.source.blocks[k]);
      h.image.push_back(g.image[kg]);
      h.unitaries.push_back(g.unitaries[kg] * f.unitaries[k]);
    }
    h.target = Ideal(h.image);
    return h;
  }

 private:
  struct State {
    Generator gen;
    std::mutex mu;
    std::map<Elem, IdealIso> cache;
  };

  Group group_;
  FdAlgebra algebra_;
  std::shared_ptr<State> state_;
};

/// Elements used for window checks: the whole group when finite, ball(R) otherwise.
inline std::vector<Elem> window_elements(const Group& g, int radius) {
  return g.is_finite() ? g.elements() : g.ball(radius);
}

/// Checks the partial-action axioms on window x window:
///  (i)   every iso runs between ideals, and alpha_t's source is A_{t^-1};
///  (ii)  A_e = A and alpha_e = id;
///  (iii) x in A_{t^-1}, alpha_t(x) in A_{s^-1} implies x in A_{(st)^-1} and
///        alpha_st(x) = alpha_s(alpha_t(x));
/// plus the unit identity alpha_t(1_{t^-1} 1_s) = 1_t 1_{ts}.
inline Report validate_partial_action(const CPartialAction& pa, int radius, double tol = 1e-10) {
  Report rep(tol);
  const Group& g = pa.group();
  const FdAlgebra& a = pa.algebra();
  const auto elems = window_elements(g, radius);
  const Elem e = g.id();

  const IdealIso& ide = pa.iso(e);
  if (ide.source != Ideal::whole(a) || ide.target != Ideal::whole(a))
    rep.fail("identity", "A_e != A");
  else
    rep.record("identity", iso_distance(ide, IdealIso::identity(a)), g.format(e));

  for (const auto& t : elems) {
    const IdealIso& f = pa.iso(t);
    const IdealIso& finv = pa.iso(g.inv(t));
    double worst = 0.0;
    for (std::size_t k = 0; k < f.source.blocks.size(); ++k) {
      if (a.block_dim(f.source.blocks[k]) != a.block_dim(f.image[k])) worst = 1.0;
      worst = std::max(worst, unitarity_defect(f.unitaries[k]));
    }
    if (f.source != finv.target) worst = 1.0;
    rep.record("domains", worst, "t=" + g.format(t));
  }

  for (const auto& s : elems) {
    const IdealIso& fs = pa.iso(s);
    const Elem sinv = g.inv(s);
    const Ideal& dom_sinv = pa.domain(sinv);
    for (const auto& t : elems) {
      const IdealIso& ft = pa.iso(t);
      const Elem st = g.mul(s, t);
      const IdealIso& fst = pa.iso(st);
      const Ideal& dom_stinv = pa.domain(g.inv(st));
      const std::string w = "s=" + g.format(s) + " t=" + g.format(t);
      double comp = 0.0;
      for (std::size_t k = 0; k < ft.source.blocks.size(); ++k) {
        const int j = ft.source.blocks[k];
        const int mid = ft.image[k];
        if (!dom_sinv.contains(mid)) continue;
        if (!dom_stinv.contains(j)) {
          comp = 1.0;
          continue;
        }
        const int ks = fs.source.local_index(mid);
        const int kst = fst.source.local_index(j);
        if (ks < 0 || kst < 0 || fs.image[ks] != fst.image[kst]) {
          comp = 1.0;
          continue;
        }
        comp = std::max(comp, phase_distance(fst.unitaries[kst], fs.unitaries[ks] * ft.unitaries[k]));
      }
      rep.record("composition", comp, w);

      // alpha_s(1_{s^-1} 1_t) = 1_s 1_{st}
      std::vector<int> img;
      for (int j : (dom_sinv & pa.domain(t)).blocks) {
        const int m = fs.map_block(j);
        if (m >= 0) img.push_back(m);
      }
      rep.record("unit-projection", Ideal(img) == (pa.domain(s) & pa.domain(st)) ? 0.0 : 1.0, w);
    }
  }
  return rep;
}

/// Restriction to the ideal J, as a partial action on J itself (blocks
/// renumbered in ascending order): J_t = J cap alpha_t(A_{t^-1} cap J).
inline CPartialAction restrict(const CPartialAction& pa, const Ideal& j) {
  const FdAlgebra& a = pa.algebra();
  for (int b : j.blocks)
    if (b < 0 || b >= a.block_count()) throw ShapeMismatch("restrict: ideal block out of range");
  FdAlgebra sub = j.as_algebra(a);
  return CPartialAction(pa.group(), sub, [pa, j](const Elem& t) {
    const IdealIso& f = pa.iso(t);
    IdealIso r;
    for (std::size_t k = 0; k < f.source.blocks.size(); ++k) {
      const int src = f.source.blocks[k];
      if (!j.contains(src) || !j.contains(f.image[k])) continue;
      r.source.blocks.push_back(j.local_index(src));
      r.image.push_back(j.local_index(f.image[k]));
      r.unitaries.push_back(f.unitaries[k]);
    }
    r.target = Ideal(r.image);
    return r;
  });
}

/// The restriction of pa to the center Z(A) = C^m.
inline CPartialAction center_restriction(const CPartialAction& pa) {
  const FdAlgebra z = FdAlgebra::commutative(pa.algebra().block_count());
  return CPartialAction(pa.group(), z, [pa](const Elem& t) {
    const IdealIso& f = pa.iso(t);
    IdealIso r;
    r.source = f.source;
    r.target = f.target;
    r.image = f.image;
    r.unitaries.assign(f.image.size(), Matrix::Identity(1, 1));
    return r;
  });
}

/// Largest discrepancy between two families on the given elements.
inline double action_distance(const CPartialAction& x, const CPartialAction& y, const std::vector<Elem>& elems) {
  if (x.algebra() != y.algebra()) return 1.0;
  double m = 0.0;
  for (const auto& t : elems) m = std::max(m, iso_distance(x.iso(t), y.iso(t)));
  return m;
}

}  // namespace fellap
