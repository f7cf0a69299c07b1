#pragma once

// Partial actions a Fell bundle induces on the center of B_e (central) and on
// the spectrum of a commutative B_e (spectral).

#include <optional>
#include <string>
#include <vector>

#include "fellap/fellbundle.hpp"

namespace fellap {

namespace detail {

/// Unit-fiber coordinates of the block projection p_k.
inline Vector block_projection(const FellBundle& b, int k) {
  const FdAlgebra& a = b.unit_algebra();
  FdElement p = FdElement::zero(a);
  p.blocks[k].setIdentity();
  return b.from_unit(p);
}

/// Blocks of B_e met by span{m n^* : m, n in B_t}; this span is an ideal and
/// its dimension must match the blocks it meets.
inline Ideal fiber_ideal(const FellBundle& b, const Elem& t, double tol) {
  const Group& g = b.group();
  const FdAlgebra& a = b.unit_algebra();
  const int d = b.dim(t);
  const Elem tinv = g.inv(t);
  std::vector<Vector> span;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      span.push_back(b.mul(t, Vector::Unit(d, i), tinv, b.star(t, Vector::Unit(d, j))));
  std::vector<int> blocks;
  for (int k = 0; k < a.block_count(); ++k) {
    FdElement ones = FdElement::zero(a);
    ones.blocks[k].setOnes();
    const Vector mask = b.from_unit(ones);
    for (const auto& v : span)
      if (max_abs(v.cwiseProduct(mask)) > tol) {
        blocks.push_back(k);
        break;
      }
  }
  Ideal ideal(blocks);
  if (!span.empty()) {
    Matrix m(a.dim(), static_cast<Eigen::Index>(span.size()));
    for (std::size_t c = 0; c < span.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = span[c];
    if (numerical_rank(m) != ideal.dim(a))
      throw InconsistentBundle("span of B_t B_t^* at t=" + g.format(t) + " is not an ideal of B_e");
  }
  return ideal;
}

}  // namespace detail

/// The central partial action sigma on Z(B_e) = C^m (one point per block of
/// B_e). sigma_t(p_k) is the unique central y in I_t = span B_t B_t^* with
/// m p_k = y m for every m in B_t, found by least squares over the block
/// projections of I_t; the residual must be <= 1e-9 and y must be a single
/// block projection. Computed lazily; elements of window(radius) are forced
/// immediately so that inconsistencies surface here.
inline CPartialAction central_partial_action(const FellBundle& b, int radius = 0, double tol = 1e-9) {
  const FdAlgebra z = FdAlgebra::commutative(b.unit_algebra().block_count());
  CPartialAction sigma(b.group(), z, [b, tol](const Elem& t) {
    const Group& g = b.group();
    const Elem e = g.id();
    const int d = b.dim(t);
    const Ideal range = detail::fiber_ideal(b, t, tol);
    const Ideal source = detail::fiber_ideal(b, g.inv(t), tol);
    std::vector<int> src, dst;
    std::vector<Matrix> us;
    for (int k : source.blocks) {
      const Vector pk = detail::block_projection(b, k);
      // Stack m p_k = sum_l c_l p_l m over the basis vectors m of B_t.
      Vector rhs(static_cast<Eigen::Index>(d) * d);
      Matrix lhs = Matrix::Zero(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(range.size()));
      for (int i = 0; i < d; ++i) {
        const Vector m = Vector::Unit(d, i);
        rhs.segment(static_cast<Eigen::Index>(i) * d, d) = b.mul(t, m, e, pk);
        for (std::size_t c = 0; c < range.size(); ++c)
          lhs.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(c), d, 1) =
              b.mul(e, detail::block_projection(b, range.blocks[c]), t, m);
      }
      const Vector coef = lhs.completeOrthogonalDecomposition().solve(rhs);
      const double residual = max_abs(lhs * coef - rhs);
      const std::string where = "t=" + g.format(t) + " block " + std::to_string(k);
      if (!(residual <= tol)) throw InconsistentBundle("central action: no solution at " + where);
      int hot = -1;
      bool single = true;
      for (Eigen::Index c = 0; c < coef.size(); ++c) {
        if (std::abs(coef(c) - 1.0) <= tol) {
          single = single && hot < 0;
          hot = static_cast<int>(c);
        } else if (std::abs(coef(c)) > tol) {
          single = false;
        }
      }
      if (!single || hot < 0) throw InconsistentBundle("central action: image is not a minimal projection at " + where);
      src.push_back(k);
      dst.push_back(range.blocks[hot]);
      us.push_back(Matrix::Identity(1, 1));
    }
    const FdAlgebra zz = FdAlgebra::commutative(b.unit_algebra().block_count());
    IdealIso f = IdealIso::make(zz, src, dst, us);
    if (f.target != range) throw InconsistentBundle("central action: sigma_t is not onto Z(I_t) at t=" + g.format(t));
    return f;
  });
  for (const auto& t : window_elements(b.group(), radius)) sigma.iso(t);
  return sigma;
}

/// Spectral partial action of a bundle with commutative B_e = C^m: theta_t
/// maps point k of X_{t^-1} to the unique point l with p_l (m p_k) = m p_k for
/// all m in B_t, and alpha_t(f) = f o theta_{t^-1} is its C*-form.
class SpectralAction {
 public:
  SpectralAction(CPartialAction alpha) : alpha_(std::move(alpha)) {}
  const CPartialAction& alpha() const { return alpha_; }
  /// theta_t(k), or nullopt when k is not in X_{t^-1}.
  std::optional<int> theta(const Elem& t, int k) const {
    const int l = alpha_.iso(t).map_block(k);
    return l < 0 ? std::nullopt : std::optional<int>(l);
  }
  int points() const { return alpha_.algebra().block_count(); }

 private:
  CPartialAction alpha_;
};

inline SpectralAction spectral_partial_action(const FellBundle& b, int radius = 0, double tol = 1e-9) {
  const FdAlgebra& a = b.unit_algebra();
  if (!a.is_commutative()) throw Unsupported("spectral partial action needs a commutative unit fiber");
  const int m = a.block_count();
  CPartialAction alpha(b.group(), a, [b, m, tol](const Elem& t) {
    const Group& g = b.group();
    const Elem e = g.id();
    const int d = b.dim(t);
    std::vector<int> src, dst;
    std::vector<Matrix> us;
    for (int k = 0; k < m; ++k) {
      const Vector pk = detail::block_projection(b, k);
      std::vector<Vector> images;
      bool nonzero = false;
      for (int i = 0; i < d; ++i) {
        images.push_back(b.mul(t, Vector::Unit(d, i), e, pk));
        nonzero = nonzero || max_abs(images.back()) > tol;
      }
      if (!nonzero) continue;
      int found = -1;
      for (int l = 0; l < m; ++l) {
        const Vector pl = detail::block_projection(b, l);
        bool fixes = true;
        for (const auto& v : images) fixes = fixes && max_abs(b.mul(e, pl, t, v) - v) <= tol;
        if (!fixes) continue;
        if (found >= 0)
          throw InconsistentBundle("spectral action: ambiguous image of point " + std::to_string(k) +
                                   " at t=" + g.format(t));
        found = l;
      }
      if (found < 0)
        throw InconsistentBundle("spectral action: point " + std::to_string(k) + " has no image at t=" + g.format(t));
      src.push_back(k);
      dst.push_back(found);
      us.push_back(Matrix::Identity(1, 1));
    }
    return IdealIso::make(b.unit_algebra(), src, dst, us);
  });
  for (const auto& t : window_elements(b.group(), radius)) alpha.iso(t);
  return SpectralAction(std::move(alpha));
}

}  // namespace fellap
