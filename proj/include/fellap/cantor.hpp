#pragma once

// The partial action of F_n on Cantor space X = {1..n}^N behind the Cuntz
// algebra O_n: g = a b^-1 (a, b positive) maps X_b onto X_a by b mu -> a mu,
// and every other reduced word has zero domain. Functions on X are locally
// constant and stored as value tables over the words of one depth.
//
// Letters are 0-based internally and printed 1..n; letter j is the free
// generator j.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fellap/errors.hpp"
#include "fellap/group.hpp"
#include "fellap/linalg.hpp"
#include "fellap/report.hpp"

namespace fellap {

using Word = std::vector<int>;

inline std::string format_word(const Word& w) {
  if (w.empty()) return "-";
  std::string s;
  for (int c : w) s += std::to_string(c + 1);
  return s;
}

inline bool is_prefix(const Word& p, const Word& w) {
  return p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin());
}

/// Locally constant function on {1..n}^N: one value per word of length depth.
class CylFun {
 public:
  CylFun(int n, int depth) : n_(n), depth_(depth), table_(power(n, depth), Complex(0.0)) {
    if (n < 2) throw Error("alphabet size must be >= 2");
    if (depth < 0) throw Error("depth must be >= 0");
  }

  static CylFun constant(int n, Complex c) {
    CylFun f(n, 0);
    f.table_[0] = c;
    return f;
  }

  /// Indicator of the cylinder X_w.
  static CylFun indicator(int n, const Word& w) {
    CylFun f(n, static_cast<int>(w.size()));
    for (int c : w)
      if (c < 0 || c >= n) throw Error("letter out of range");
    f.table_[f.index(w)] = 1.0;
    return f;
  }

  int n() const { return n_; }
  int depth() const { return depth_; }
  const std::vector<Complex>& table() const { return table_; }
  std::vector<Complex>& table() { return table_; }

  std::size_t index(const Word& w) const {
    std::size_t k = 0;
    for (int c : w) k = k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c);
    return k;
  }
  Word word(std::size_t k) const {
    Word w(static_cast<std::size_t>(depth_));
    for (int i = depth_ - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] = static_cast<int>(k % static_cast<std::size_t>(n_));
      k /= static_cast<std::size_t>(n_);
    }
    return w;
  }

  Complex& at(const Word& w) { return table_.at(index(w)); }
  Complex at(const Word& w) const { return table_.at(index(w)); }

  /// Value at any point extending w, |w| >= depth.
  Complex value(const Word& w) const {
    if (static_cast<int>(w.size()) < depth_) throw Error("word shorter than depth");
    return table_[index(Word(w.begin(), w.begin() + depth_))];
  }

  /// Same function at a larger depth; each value is replicated n-fold per level.
  CylFun refined(int depth) const {
    if (depth < depth_) throw Error("cannot refine to a smaller depth");
    CylFun f = *this;
    while (f.depth_ < depth) {
      std::vector<Complex> t(f.table_.size() * static_cast<std::size_t>(n_));
      for (std::size_t k = 0; k < f.table_.size(); ++k)
        for (int c = 0; c < n_; ++c) t[k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c)] = f.table_[k];
      f.table_ = std::move(t);
      ++f.depth_;
    }
    return f;
  }

  /// Minimal-depth form: drops levels whose sibling blocks are constant.
  CylFun canonical() const {
    CylFun f = *this;
    while (f.depth_ > 0) {
      const std::size_t m = f.table_.size() / static_cast<std::size_t>(n_);
      bool flat = true;
      for (std::size_t k = 0; k < m && flat; ++k)
        for (int c = 1; c < n_ && flat; ++c)
          flat = f.table_[k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(c)] ==
                 f.table_[k * static_cast<std::size_t>(n_)];
      if (!flat) break;
      std::vector<Complex> t(m);
      for (std::size_t k = 0; k < m; ++k) t[k] = f.table_[k * static_cast<std::size_t>(n_)];
      f.table_ = std::move(t);
      --f.depth_;
    }
    return f;
  }

  static std::size_t power(int n, int d) {
    std::size_t p = 1;
    for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(n);
    return p;
  }

 private:
  int n_;
  int depth_;
  std::vector<Complex> table_;
};

enum class CylOp { add, sub, mul };

/// Pointwise f op g after refining both to the larger depth.
inline CylFun cyl_arith(const CylFun& f, const CylFun& g, CylOp op) {
  if (f.n() != g.n()) throw ContextMismatch("cylinder functions over different alphabets");
  const int d = std::max(f.depth(), g.depth());
  CylFun a = f.refined(d);
  const CylFun b = g.refined(d);
  std::vector<Complex>& t = a.table();
  for (std::size_t k = 0; k < t.size(); ++k) {
    switch (op) {
      case CylOp::add: t[k] += b.table()[k]; break;
      case CylOp::sub: t[k] -= b.table()[k]; break;
      case CylOp::mul: t[k] *= b.table()[k]; break;
    }
  }
  return a;
}

inline CylFun operator+(const CylFun& f, const CylFun& g) { return cyl_arith(f, g, CylOp::add); }
inline CylFun operator-(const CylFun& f, const CylFun& g) { return cyl_arith(f, g, CylOp::sub); }
inline CylFun operator*(const CylFun& f, const CylFun& g) { return cyl_arith(f, g, CylOp::mul); }

inline CylFun cyl_scale(const CylFun& f, Complex c) {
  CylFun g = f;
  for (auto& v : g.table()) v *= c;
  return g;
}

/// Pointwise complex conjugate, the involution of C(X).
inline CylFun cyl_star(const CylFun& f) {
  CylFun g = f;
  for (auto& v : g.table()) v = std::conj(v);
  return g;
}

inline double sup_norm(const CylFun& f) {
  double m = 0.0;
  for (const auto& v : f.table()) m = std::max(m, std::abs(v));
  return m;
}

inline double cyl_distance(const CylFun& f, const CylFun& g) { return sup_norm(f - g); }

/// g in F_n as a b^-1 with a, b positive words, or domain-zero.
class PartialSymbol {
 public:
  PartialSymbol(const Group& g, const Elem& x) : elem_(x) {
    if (g.kind() != GroupKind::free) throw ContextMismatch("partial symbols live in a free group");
    g.check(x);
    n_ = g.rank();
    std::size_t i = 0;
    while (i < x.code.size() && x.code[i] % 2 == 0) a_.push_back(x.code[i++] / 2);
    std::vector<int> inv;
    while (i < x.code.size() && x.code[i] % 2 == 1) inv.push_back(x.code[i++] / 2);
    zero_ = i < x.code.size();
    b_.assign(inv.rbegin(), inv.rend());
    if (zero_) {
      a_.clear();
      b_.clear();
    }
  }

  const Elem& elem() const { return elem_; }
  int n() const { return n_; }
  bool domain_zero() const { return zero_; }
  const Word& a() const { return a_; }
  const Word& b() const { return b_; }

  /// Indicator of the range domain D_g = C(X_a); zero when the domain is zero.
  CylFun range_unit() const { return zero_ ? CylFun(n_, 0) : CylFun::indicator(n_, a_); }
  /// Indicator of the source domain D_{g^-1} = C(X_b).
  CylFun source_unit() const { return zero_ ? CylFun(n_, 0) : CylFun::indicator(n_, b_); }

 private:
  Elem elem_;
  int n_ = 0;
  bool zero_ = false;
  Word a_, b_;
};

/// theta_g(b mu) = a mu on points given by a finite prefix.
inline Word theta_point(const PartialSymbol& g, const Word& x) {
  if (g.domain_zero()) throw DomainViolation("zero domain");
  if (!is_prefix(g.b(), x)) throw DomainViolation("point is not in X_b");
  Word y = g.a();
  y.insert(y.end(), x.begin() + static_cast<std::ptrdiff_t>(g.b().size()), x.end());
  return y;
}

/// alpha_g(f) = f o theta_g^-1 for f supported in X_b.
inline CylFun theta_apply(const PartialSymbol& g, const CylFun& f, double tol = 1e-12) {
  if (g.domain_zero()) throw DomainViolation("theta_apply: zero domain");
  if (f.n() != g.n()) throw ContextMismatch("alphabet mismatch");
  const int lb = static_cast<int>(g.b().size());
  const int la = static_cast<int>(g.a().size());
  const CylFun src = f.refined(std::max(f.depth(), lb));
  for (std::size_t k = 0; k < src.table().size(); ++k)
    if (std::abs(src.table()[k]) > tol && !is_prefix(g.b(), src.word(k)))
      throw DomainViolation("theta_apply: function is not supported in X_" + format_word(g.b()));
  CylFun out(f.n(), src.depth() - lb + la);
  for (std::size_t k = 0; k < src.table().size(); ++k) {
    const Word w = src.word(k);
    if (!is_prefix(g.b(), w)) continue;
    out.at(theta_point(g, w)) = src.table()[k];
  }
  return out;
}

/// Finite sum of scaled cylinder indicators, sum_w c_w 1_{X_w}. Products and
/// translates of single cylinders stay single cylinders, which keeps the
/// witness sums below linear in the witness support.
class CylSum {
 public:
  explicit CylSum(int n) : n_(n) {}
  static CylSum cylinder(int n, const Word& w, Complex c) {
    CylSum s(n);
    s.add(w, c);
    return s;
  }

  int n() const { return n_; }
  const std::map<Word, Complex>& terms() const { return terms_; }
  void add(const Word& w, Complex c) {
    if (c != Complex(0.0)) terms_[w] += c;
  }
  void add(const CylSum& o) {
    for (const auto& [w, c] : o.terms_) add(w, c);
  }

  friend CylSum operator*(const CylSum& x, const CylSum& y) {
    CylSum out(x.n_);
    for (const auto& [u, c] : x.terms_)
      for (const auto& [v, d] : y.terms_) {
        if (is_prefix(u, v))
          out.add(v, c * d);
        else if (is_prefix(v, u))
          out.add(u, c * d);
      }
    return out;
  }

  CylSum conj() const {
    CylSum out(n_);
    for (const auto& [w, c] : terms_) out.add(w, std::conj(c));
    return out;
  }

  /// Dense table at the largest word length.
  CylFun to_fun() const {
    int d = 0;
    for (const auto& kv : terms_) d = std::max(d, static_cast<int>(kv.first.size()));
    CylFun f(n_, 0);
    for (int level = 0; level <= d; ++level) {
      if (level > 0) f = f.refined(level);
      for (const auto& [w, c] : terms_)
        if (static_cast<int>(w.size()) == level) f.at(w) += c;
    }
    return f;
  }

 private:
  int n_;
  std::map<Word, Complex> terms_;
};

/// alpha_g on a cylinder sum; each cylinder must lie in X_b.
inline CylSum theta_apply(const PartialSymbol& g, const CylSum& f) {
  if (g.domain_zero()) throw DomainViolation("theta_apply: zero domain");
  CylSum out(f.n());
  for (const auto& [w, c] : f.terms()) {
    if (!is_prefix(g.b(), w))
      throw DomainViolation("theta_apply: cylinder X_" + format_word(w) + " is not inside X_" + format_word(g.b()));
    out.add(theta_point(g, w), c);
  }
  return out;
}

/// Positive word of a free-group element (generator j -> letter j).
inline Word positive_word(const Elem& x) {
  Word w;
  for (int c : x.code) {
    if (c % 2) throw Error("not a positive word");
    w.push_back(c / 2);
  }
  return w;
}

inline Elem word_elem(const Group& fn, const Word& w) {
  Elem x = fn.id();
  for (int c : w) x = fn.mul(x, fn.generator(c));
  return x;
}

/// xi_i(g) = i^{-1/2} 1_{X_g} for positive g with 1 <= |g| <= i, and 0
/// otherwise. With include_identity the layer |g| = 0 is added as well.
class CuntzWitness {
 public:
  CuntzWitness(int n, int i, bool include_identity = false) : group_(Group::free(n)), n_(n), i_(i) {
    if (i < 1) throw Error("witness index must be >= 1");
    const Complex c(1.0 / std::sqrt(static_cast<double>(i)), 0.0);
    std::vector<Word> layer{Word{}};
    for (int len = 0; len <= i; ++len) {
      if (len > 0 || include_identity)
        for (const auto& w : layer) values_.emplace(word_elem(group_, w), CylSum::cylinder(n, w, c));
      std::vector<Word> next;
      for (const auto& w : layer)
        for (int l = 0; l < n; ++l) {
          next.push_back(w);
          next.back().push_back(l);
        }
      layer = std::move(next);
    }
  }

  const Group& group() const { return group_; }
  int n() const { return n_; }
  int index() const { return i_; }
  const std::map<Elem, CylSum>& values() const { return values_; }
  const CylSum* find(const Elem& h) const {
    auto it = values_.find(h);
    return it == values_.end() ? nullptr : &it->second;
  }

 private:
  Group group_;
  int n_;
  int i_;
  std::map<Elem, CylSum> values_;
};

inline CuntzWitness xi_witness(int i, int n, bool include_identity = false) {
  return CuntzWitness(n, i, include_identity);
}

/// || sum_g xi(g)^* xi(g) ||_sup.
inline double witness_bound(const CuntzWitness& xi) {
  CylSum s(xi.n());
  for (const auto& [g, v] : xi.values()) s.add(v.conj() * v);
  return sup_norm(s.to_fun());
}

/// || 1_g - sum_h xi(h)^* alpha_g(1_{g^-1} xi(g^-1 h)) ||_sup, the AP defect
/// at the target b = 1_g evaluated through the partial action.
inline double cuntz_ap_defect(const CuntzWitness& xi, const Elem& g) {
  const Group& fn = xi.group();
  const PartialSymbol sym(fn, g);
  if (sym.domain_zero()) throw DomainViolation("g = " + fn.format(g) + " has zero domain");
  const Elem ginv = fn.inv(g);
  const CylSum src = CylSum::cylinder(xi.n(), sym.b(), 1.0);
  CylSum sum(xi.n());
  for (const auto& [h, vh] : xi.values()) {
    const CylSum* v = xi.find(fn.mul(ginv, h));
    if (!v) continue;
    sum.add(vh.conj() * theta_apply(sym, src * *v));
  }
  return sup_norm(sym.range_unit() - sum.to_fun());
}

inline double cuntz_ap_defect(int i, int n, const Elem& g, bool include_identity = false) {
  return cuntz_ap_defect(xi_witness(i, n, include_identity), g);
}

/// min(1, |g|/i) for positive g: only the terms h = g h' with
/// 1 <= |h'| <= i - |g| survive, and each length layer of h' sums to 1_{X_g}.
/// With the identity included the layer |h'| = 0 survives too, giving
/// |1 - max(0, i + 1 - |g|)/i|.
inline std::optional<double> cuntz_predicted_defect(int i, const Group& fn, const Elem& g,
                                                    bool include_identity = false) {
  if (!fn.is_identity(g) && !fn.is_positive(g)) return std::nullopt;
  const double len = fn.word_length(g);
  if (include_identity) return std::abs(1.0 - std::max(0.0, i + 1.0 - len) / static_cast<double>(i));
  return std::min(1.0, len / static_cast<double>(i));
}

/// Random function at the given depth supported in X_w.
inline CylFun random_cylfun(int n, int depth, const Word& support, Rng& rng) {
  CylFun f(n, std::max(depth, static_cast<int>(support.size())));
  auto& t = f.table();
  for (std::size_t k = 0; k < t.size(); ++k)
    if (is_prefix(support, f.word(k))) t[k] = random_complex(rng);
  return f;
}

/// Partial-action axioms of theta on ball(radius) x ball(radius):
/// identity (D_e = C(X), alpha_e = id), unit-projection
/// alpha_t(1_{t^-1} 1_s) = 1_t 1_{ts}, and composition
/// alpha_s(alpha_t(x)) = alpha_st(x) on random x in
/// alpha_t^-1(D_t n D_{s^-1}), which must also lie in D_{(st)^-1}.
inline Report validate_cantor_action(int n, int radius, int samples_per_pair = 1, std::uint64_t seed = 0,
                                     double tol = 1e-12) {
  Report rep(tol);
  const Group fn = Group::free(n);
  const auto ball = fn.ball(radius);
  Rng rng(seed);
  const PartialSymbol e(fn, fn.id());
  rep.record("identity", sup_norm(e.range_unit() - CylFun::constant(n, 1.0)), "t=e");
  {
    const CylFun f = random_cylfun(n, 3, {}, rng);
    rep.record("identity", cyl_distance(theta_apply(e, f), f), "t=e");
  }
  for (const auto& t : ball) {
    const PartialSymbol pt(fn, t);
    for (const auto& s : ball) {
      const PartialSymbol ps(fn, s);
      const PartialSymbol pst(fn, fn.mul(s, t));
      const std::string w = "s=" + fn.format(s) + " t=" + fn.format(t);
      // Unit identity.
      CylFun lhs(n, 0);
      if (!pt.domain_zero()) lhs = theta_apply(pt, PartialSymbol(fn, fn.inv(t)).range_unit() * ps.range_unit());
      const CylFun rhs = pt.range_unit() * PartialSymbol(fn, fn.mul(t, s)).range_unit();
      rep.record("unit-projection", cyl_distance(lhs, rhs), w);
      if (pt.domain_zero() || ps.domain_zero()) continue;
      for (int k = 0; k < samples_per_pair; ++k) {
        // y in D_t n D_{s^-1}, x = alpha_t^-1(y).
        const CylFun y = random_cylfun(n, 2, pt.a(), rng) * ps.source_unit();
        if (sup_norm(y) == 0.0) continue;
        const CylFun x = theta_apply(PartialSymbol(fn, fn.inv(t)), y);
        if (pst.domain_zero()) {
          rep.fail("composition", w + " (st has zero domain)");
          continue;
        }
        try {
          rep.record("composition", cyl_distance(theta_apply(ps, theta_apply(pt, x)), theta_apply(pst, x)), w);
        } catch (const DomainViolation&) {
          rep.fail("composition", w + " (x outside D_{(st)^-1})");
        }
      }
    }
  }
  return rep;
}

/// Arrow (x, g) of the transformation groupoid X x| G: x in X_{g^-1} = X_b.
/// Points are eventually constant sequences w 1 1 1 ..., stored as w with the
/// trailing first letters stripped; the depth-d table uses one such point
/// per depth-d cylinder.
struct Arrow {
  Word x;
  Elem g;
  friend bool operator<(const Arrow& p, const Arrow& q) { return std::tie(p.x, p.g) < std::tie(q.x, q.g); }
  friend bool operator==(const Arrow& p, const Arrow& q) { return p.x == q.x && p.g == q.g; }
};

inline Word canonical_point(Word w) {
  while (!w.empty() && w.back() == 0) w.pop_back();
  return w;
}

/// Pads a point so that it has at least len letters.
inline Word point_prefix(const Word& w, std::size_t len) {
  Word p = w;
  if (p.size() < len) p.resize(len, 0);
  return p;
}

class SpectralGroupoid {
 public:
  SpectralGroupoid(int n, int depth, int radius) : fn_(Group::free(n)), n_(n), depth_(depth), radius_(radius) {
    if (depth < 0 || radius < 0) throw Error("depth and radius must be >= 0");
    const CylFun grid(n, depth);
    for (const auto& g : fn_.ball(radius)) {
      const PartialSymbol sym(fn_, g);
      if (sym.domain_zero()) continue;
      for (std::size_t k = 0; k < grid.table().size(); ++k) {
        const Word c = grid.word(k);
        if (is_prefix(sym.b(), c)) arrows_.push_back({canonical_point(c), g});
      }
    }
  }

  const Group& group() const { return fn_; }
  int n() const { return n_; }
  int depth() const { return depth_; }
  int radius() const { return radius_; }
  const std::vector<Arrow>& arrows() const { return arrows_; }

  bool valid(const Arrow& a) const {
    const PartialSymbol sym(fn_, a.g);
    return !sym.domain_zero() && is_prefix(sym.b(), point_prefix(a.x, sym.b().size()));
  }
  Word source(const Arrow& a) const { return a.x; }
  Word range(const Arrow& a) const {
    const PartialSymbol sym(fn_, a.g);
    return canonical_point(theta_point(sym, point_prefix(a.x, sym.b().size())));
  }
  bool is_unit(const Arrow& a) const { return fn_.is_identity(a.g); }
  /// (x, t)^-1 = (t x, t^-1).
  Arrow inverse(const Arrow& a) const { return {range(a), fn_.inv(a.g)}; }
  /// (x, s)(y, t) = (y, st) when x = t y.
  std::optional<Arrow> compose(const Arrow& p, const Arrow& q) const {
    if (p.x != range(q)) return std::nullopt;
    return Arrow{q.x, fn_.mul(p.g, q.g)};
  }

 private:
  Group fn_;
  int n_, depth_, radius_;
  std::vector<Arrow> arrows_;
};

inline SpectralGroupoid spectral_groupoid(int n, int depth, int radius) { return SpectralGroupoid(n, depth, radius); }

/// Groupoid axioms on the enumerated arrows: inverses are arrows with
/// s(a^-1) = r(a), r(a^-1) = s(a), a^-1^-1 = a; composites of composable
/// pairs are arrows with the right source and range; a a^-1 and a^-1 a are
/// units; associativity on composable triples from the table.
inline Report check_groupoid(const SpectralGroupoid& gr) {
  Report rep(0.0);
  const auto& arrows = gr.arrows();
  auto flag = [&](const std::string& check, bool ok, const std::string& w) {
    if (ok)
      rep.record(check, 0.0, w);
    else
      rep.fail(check, w);
  };
  auto show = [&](const Arrow& a) { return "(" + format_word(a.x) + "," + gr.group().format(a.g) + ")"; };
  std::map<Word, std::vector<std::size_t>> by_range;
  for (std::size_t i = 0; i < arrows.size(); ++i) by_range[gr.range(arrows[i])].push_back(i);

  for (const auto& a : arrows) {
    const Arrow inv = gr.inverse(a);
    flag("inverse", gr.valid(inv) && gr.source(inv) == gr.range(a) && gr.range(inv) == gr.source(a) &&
                        gr.inverse(inv) == a,
         show(a));
    const auto left = gr.compose(a, inv);
    const auto right = gr.compose(inv, a);
    flag("units", left && right && gr.is_unit(*left) && gr.is_unit(*right) && left->x == gr.range(a) &&
                      right->x == gr.source(a),
         show(a));
  }
  for (const auto& p : arrows) {
    auto it = by_range.find(p.x);
    if (it == by_range.end()) continue;
    for (std::size_t qi : it->second) {
      const Arrow& q = arrows[qi];
      const auto pq = gr.compose(p, q);
      flag("composability",
           pq && gr.valid(*pq) && gr.source(*pq) == gr.source(q) && gr.range(*pq) == gr.range(p), show(p) + show(q));
      if (!pq) continue;
      auto jt = by_range.find(q.x);
      if (jt == by_range.end()) continue;
      for (std::size_t ri : jt->second) {
        const Arrow& r = arrows[ri];
        const auto qr = gr.compose(q, r);
        const auto lhs = gr.compose(*pq, r);
        const auto rhs = qr ? gr.compose(p, *qr) : std::nullopt;
        flag("associativity", lhs && rhs && *lhs == *rhs, show(p) + show(q) + show(r));
      }
    }
  }
  return rep;
}

}  // namespace fellap
