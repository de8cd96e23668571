#pragma once

// Builders for the named (0,4) tensors R1, R2, psi and for the pointwise
// curvature of the model spaces C^n, CP^n, CD^n, S^6 and their products.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "nkcurv/four_tensor.hpp"
#include "nkcurv/hermitian.hpp"
#include "nkcurv/ricci.hpp"

namespace nkcurv {

/// R1(x,y,z,u) = g(y,z) g(x,u) - g(x,z) g(y,u)
inline FourTensor build_R1(const HermitianPoint& p) {
  const Matrix& g = p.g();
  return FourTensor::from_components(p.dim(), [&](int i, int j, int k, int l) {
    return g(j, k) * g(i, l) - g(i, k) * g(j, l);
  });
}

/// R2(x,y,z,u) = g(Jy,z) g(Jx,u) - g(Jx,z) g(Jy,u) - 2 g(Jx,y) g(Jz,u)
inline FourTensor build_R2(const HermitianPoint& p) {
  const Matrix w = p.kahler_form();
  return FourTensor::from_components(p.dim(), [&](int i, int j, int k, int l) {
    return w(j, k) * w(i, l) - w(i, k) * w(j, l) - 2.0 * w(i, j) * w(k, l);
  });
}

inline bool is_symmetric(const Matrix& s, double tol) {
  return s.rows() == s.cols() && (s - s.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Six-term tensor psi built from a symmetric form S:
///   g(Jy,z)S(Jx,u) - g(Jx,z)S(Jy,u) - 2g(Jx,y)S(Jz,u)
/// + g(Jx,u)S(Jy,z) - g(Jy,u)S(Jx,z) - 2g(Jz,u)S(Jx,y)
/// The curvature symmetries of psi hold when S is J-invariant.
inline FourTensor build_psi(const HermitianPoint& p, const Matrix& s,
                            double tol = kStructuralTolerance) {
  if (s.rows() != p.dim() || s.cols() != p.dim())
    throw Error(ErrorCode::DimensionMismatch, "S does not match point dimension");
  if (!is_symmetric(s, tol)) throw Error(ErrorCode::InvalidArgument, "S must be symmetric");
  const Matrix w = p.kahler_form();
  const Matrix v = p.J().transpose() * s;  // v(a, b) = S(J e_a, e_b)
  return FourTensor::from_components(p.dim(), [&](int i, int j, int k, int l) {
    return w(j, k) * v(i, l) - w(i, k) * v(j, l) - 2.0 * w(i, j) * v(k, l) + w(i, l) * v(j, k) -
           w(j, l) * v(i, k) - 2.0 * w(k, l) * v(i, j);
  });
}

/// Curvature of the complex space form of constant holomorphic sectional
/// curvature c: C^n (c = 0), CP^n (c > 0), CD^n (c < 0).
inline FourTensor kahler_space_form(const HermitianPoint& p, double c) {
  return (c / 4.0) * (build_R1(p) + build_R2(p));
}

// Imaginary octonion units multiply along the oriented lines of the Fano
// plane: e_a e_b = e_c for each triple below (and cyclic shifts), zero-based.
inline constexpr std::array<std::array<int, 3>, 7> kFanoTriples = {{
    {0, 1, 2}, {0, 3, 4}, {0, 6, 5}, {1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 5, 4},
}};

/// Seven-dimensional cross product x × y = Im(x y) of imaginary octonions.
template <class Vec>
Vec cross7(const Vec& x, const Vec& y) {
  Vec out = x;
  for (int i = 0; i < 7; ++i) out[i] = x[i] * 0.0;
  for (const auto& t : kFanoTriples) {
    for (int r = 0; r < 3; ++r) {
      const int a = t[r], b = t[(r + 1) % 3], c = t[(r + 2) % 3];
      out[c] = out[c] + x[a] * y[b] - x[b] * y[a];
    }
  }
  return out;
}

inline Vector cross7(const Vector& x, const Vector& y) {
  if (x.size() != 7 || y.size() != 7)
    throw Error(ErrorCode::DimensionMismatch, "cross7 needs 7-vectors");
  return cross7<Vector>(x, y);
}

/// Seeded orthonormal basis of the tangent space p^perp of S^6 (7x6, columns).
inline Matrix s6_tangent_frame(const Vector& p, std::uint64_t frame_seed,
                               double tol = kStructuralTolerance) {
  if (p.size() != 7) throw Error(ErrorCode::DimensionMismatch, "S^6 points are 7-vectors");
  if (std::abs(p.norm() - 1.0) > tol)
    throw Error(ErrorCode::InvalidArgument, "point is not on the unit sphere");
  CounterRng rng(frame_seed, 0x5e6);
  Matrix frame(7, 6);
  int filled = 0;
  while (filled < 6) {
    Vector w = rng.gaussian_vector(7);
    for (int pass = 0; pass < 2; ++pass) {
      w -= p.dot(w) * p;
      for (int c = 0; c < filled; ++c) w -= frame.col(c).dot(w) * frame.col(c);
    }
    const double norm = w.norm();
    if (norm < 1e-6) continue;
    frame.col(filled++) = w / norm;
  }
  return frame;
}

/// Tangent space of S^6 at p in a seeded orthonormal frame, with J_p(v) = p × v.
inline HermitianPoint s6_point(const Vector& p, std::uint64_t frame_seed,
                               double tol = kStructuralTolerance) {
  const Matrix frame = s6_tangent_frame(p, frame_seed, tol);
  Matrix j(6, 6);
  for (int b = 0; b < 6; ++b) {
    const Vector image = cross7(p, Vector(frame.col(b)));
    for (int a = 0; a < 6; ++a) j(a, b) = frame.col(a).dot(image);
  }
  return HermitianPoint(Matrix::Identity(6, 6), j);
}

/// Round S^6: constant sectional curvature one.
inline FourTensor s6_curvature(const HermitianPoint& p) {
  if (p.dim() != 6) throw Error(ErrorCode::InvalidDimension, "S^6 tangent spaces are 6-dimensional");
  return build_R1(p);
}

struct ProductFactor {
  HermitianPoint point;
  FourTensor curvature;
  std::optional<double> einstein_constant;
};

/// Direct sum of almost Hermitian factors with block-diagonal g, J and curvature.
struct ProductSpec {
  std::vector<ProductFactor> factors;
  std::vector<int> offsets;
  HermitianPoint combined;
  FourTensor curvature;

  /// Index of the single factor supporting v, or -1 if v mixes factors or is zero.
  int supporting_factor(const Vector& v, double tol = kStructuralTolerance) const {
    int found = -1;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const int begin = offsets[f];
      const int size = factors[f].point.dim();
      if (v.segment(begin, size).cwiseAbs().maxCoeff() > tol) {
        if (found >= 0) return -1;
        found = static_cast<int>(f);
      }
    }
    return found;
  }
};

inline ProductSpec product_curvature(
    const std::vector<std::pair<HermitianPoint, FourTensor>>& factors,
    double tol = kStructuralTolerance) {
  if (factors.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "a product needs at least two factors");
  int total = 0;
  std::vector<int> offsets;
  for (const auto& [point, tensor] : factors) {
    if (tensor.dim() != point.dim())
      throw Error(ErrorCode::DimensionMismatch, "factor tensor does not match its point");
    offsets.push_back(total);
    total += point.dim();
  }
  Matrix g = Matrix::Zero(total, total);
  Matrix j = Matrix::Zero(total, total);
  FourTensor r(total);
  std::vector<ProductFactor> out_factors;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& [point, tensor] = factors[f];
    const int o = offsets[f];
    const int d = point.dim();
    g.block(o, o, d, d) = point.g();
    j.block(o, o, d, d) = point.J();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) r(o + a, o + b, o + c, o + e) = tensor(a, b, c, e);
    out_factors.push_back({point, tensor, einstein_constant(contractions(tensor, point), point, tol)});
  }
  return ProductSpec{std::move(out_factors), std::move(offsets), HermitianPoint(g, j), std::move(r)};
}

}  // namespace nkcurv
