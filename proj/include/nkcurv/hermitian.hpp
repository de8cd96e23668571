#pragma once

// Pointwise linear algebra of an almost Hermitian tangent space: the metric g,
// the almost complex structure J, orthonormal frames and 2-plane types.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nkcurv/error.hpp"
#include "nkcurv/random.hpp"

namespace nkcurv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Separates exact-structure assertions from finite-difference noise.
inline constexpr double kStructuralTolerance = 1e-9;
inline constexpr double kChartTolerance = 1e-4;

/// A real inner-product space of dimension 2n with a linear operator J.
/// Vectors are coordinate columns; J acts as J * v.
class HermitianPoint {
 public:
  HermitianPoint(Matrix metric, Matrix complex_structure)
      : g_(std::move(metric)), j_(std::move(complex_structure)) {
    if (g_.rows() != g_.cols() || j_.rows() != j_.cols())
      throw Error(ErrorCode::DimensionMismatch, "g and J must be square");
    if (g_.rows() != j_.rows())
      throw Error(ErrorCode::DimensionMismatch,
                  "g is " + std::to_string(g_.rows()) + "-dimensional but J is " +
                      std::to_string(j_.rows()) + "-dimensional");
    if (g_.rows() == 0 || g_.rows() % 2 != 0)
      throw Error(ErrorCode::InvalidDimension, "dimension must be even and positive");
  }

  int dim() const { return static_cast<int>(g_.rows()); }
  int n() const { return dim() / 2; }
  const Matrix& g() const { return g_; }
  const Matrix& J() const { return j_; }

  double inner(const Vector& x, const Vector& y) const { return x.dot(g_ * y); }
  double norm(const Vector& x) const { return std::sqrt(inner(x, x)); }
  Vector apply_J(const Vector& x) const { return j_ * x; }

  /// The Kähler form g(Jx, y) as a matrix: omega(a, b) = g(J e_a, e_b).
  Matrix kahler_form() const { return j_.transpose() * g_; }

  bool is_positive_definite() const {
    Eigen::LLT<Matrix> llt(g_);
    return llt.info() == Eigen::Success && g_.isApprox(g_.transpose());
  }

 private:
  Matrix g_;
  Matrix j_;
};

struct TwoPlane {
  Vector x;
  Vector y;
};

struct StructureDefects {
  double j_square_defect;
  double compat_defect;
};

enum class PlaneLabel { Holomorphic, Antiholomorphic, Generic };

inline const char* to_string(PlaneLabel label) {
  switch (label) {
    case PlaneLabel::Holomorphic: return "holomorphic";
    case PlaneLabel::Antiholomorphic: return "antiholomorphic";
    case PlaneLabel::Generic: return "generic";
  }
  return "?";
}

struct PlaneType {
  PlaneLabel label;
  double hol_defect;
  double antihol_defect;
};

/// The canonical complex structure on R^{2n}: e_{2k-1} -> e_{2k}, e_{2k} -> -e_{2k-1}.
inline Matrix standard_complex_structure(int n) {
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;
    j(2 * k, 2 * k + 1) = -1.0;
  }
  return j;
}

inline HermitianPoint make_standard_point(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "n must be at least 1");
  return HermitianPoint(Matrix::Identity(2 * n, 2 * n), standard_complex_structure(n));
}

inline StructureDefects structure_defects(const HermitianPoint& p) {
  const Matrix& j = p.J();
  const Matrix& g = p.g();
  const Matrix square = j * j + Matrix::Identity(p.dim(), p.dim());
  const Matrix compat = j.transpose() * g * j - g;
  return {square.cwiseAbs().maxCoeff(), compat.cwiseAbs().maxCoeff()};
}

/// Modified Gram-Schmidt with one re-orthogonalisation pass. A vector whose
/// residual norm falls below `independence_tol` times its input norm is
/// treated as dependent.
inline std::vector<Vector> orthonormalize(const std::vector<Vector>& vectors,
                                          const HermitianPoint& p,
                                          double independence_tol = 1e-10) {
  std::vector<Vector> out;
  out.reserve(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const Vector& v = vectors[k];
    if (v.size() != p.dim())
      throw Error(ErrorCode::DimensionMismatch, "vector size does not match point dimension");
    const double input_norm = p.norm(v);
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& e : out) w -= p.inner(e, w) * e;
    const double residual = p.norm(w);
    if (!(input_norm > 0.0) || residual <= independence_tol * input_norm)
      throw Error(ErrorCode::RankDeficient,
                  "vector " + std::to_string(k) + " is dependent on its predecessors");
    out.push_back(w / residual);
  }
  return out;
}

/// g-orthonormal frame obtained from the coordinate basis; columns are frame vectors.
inline Matrix orthonormal_frame(const HermitianPoint& p) {
  std::vector<Vector> basis;
  for (int i = 0; i < p.dim(); ++i) basis.push_back(Vector::Unit(p.dim(), i));
  const auto frame = orthonormalize(basis, p);
  Matrix f(p.dim(), p.dim());
  for (int i = 0; i < p.dim(); ++i) f.col(i) = frame[i];
  return f;
}

/// Orthonormal frame of the form (f1, Jf1, f2, Jf2, ...). Requires an almost
/// Hermitian point; columns 2k and 2k+1 span a holomorphic plane.
inline Matrix unitary_frame(const HermitianPoint& p) {
  const int d = p.dim();
  Matrix f(d, d);
  int filled = 0;
  for (int i = 0; i < d && filled < d; ++i) {
    Vector w = Vector::Unit(d, i);
    for (int pass = 0; pass < 2; ++pass)
      for (int c = 0; c < filled; ++c) w -= p.inner(f.col(c), w) * f.col(c);
    const double norm = p.norm(w);
    if (norm < 1e-8) continue;
    w /= norm;
    Vector jw = p.apply_J(w);
    for (int pass = 0; pass < 2; ++pass) {
      for (int c = 0; c < filled; ++c) jw -= p.inner(f.col(c), jw) * f.col(c);
      jw -= p.inner(w, jw) * w;
    }
    jw /= p.norm(jw);
    f.col(filled++) = w;
    f.col(filled++) = jw;
  }
  if (filled != d) throw Error(ErrorCode::RankDeficient, "could not complete a unitary frame");
  return f;
}

inline double orthonormality_defect(const HermitianPoint& p, const TwoPlane& plane) {
  return std::max({std::abs(p.inner(plane.x, plane.x) - 1.0),
                   std::abs(p.inner(plane.y, plane.y) - 1.0),
                   std::abs(p.inner(plane.x, plane.y))});
}

inline void require_orthonormal(const HermitianPoint& p, const TwoPlane& plane, double tol) {
  if (plane.x.size() != p.dim() || plane.y.size() != p.dim())
    throw Error(ErrorCode::DimensionMismatch, "plane vectors do not match point dimension");
  // Callers pass planes built to round-off; 1e-6 keeps the check relative to
  // the structure tolerance without rejecting chart-derived frames.
  const double limit = std::max(tol, 1e-6);
  if (orthonormality_defect(p, plane) > limit)
    throw Error(ErrorCode::NotOrthonormal, "plane basis is not g-orthonormal");
}

inline PlaneType plane_type(const HermitianPoint& p, const TwoPlane& plane,
                            double tol = kStructuralTolerance) {
  require_orthonormal(p, plane, tol);
  const Vector jx = p.apply_J(plane.x);
  const Vector jy = p.apply_J(plane.y);
  auto distance_to_plane = [&](const Vector& v) {
    const Vector r = v - p.inner(plane.x, v) * plane.x - p.inner(plane.y, v) * plane.y;
    return p.norm(r);
  };
  PlaneType t;
  t.antihol_defect = std::abs(p.inner(jx, plane.y));
  t.hol_defect = distance_to_plane(jx) + distance_to_plane(jy);
  if (t.hol_defect <= tol)
    t.label = PlaneLabel::Holomorphic;
  else if (t.antihol_defect <= tol)
    t.label = PlaneLabel::Antiholomorphic;
  else
    t.label = PlaneLabel::Generic;
  return t;
}

/// Uniform unit vector with respect to g.
inline Vector sample_unit_vector(const HermitianPoint& p, CounterRng& rng, const Matrix& frame) {
  return frame * rng.unit_vector(p.dim());
}

inline TwoPlane sample_antiholomorphic_plane(const HermitianPoint& p, std::uint64_t seed,
                                             std::uint64_t stream = 0) {
  if (p.dim() < 4)
    throw Error(ErrorCode::InvalidDimension, "antiholomorphic planes need dimension >= 4");
  CounterRng rng(seed, stream);
  const Matrix frame = orthonormal_frame(p);
  const Vector x = sample_unit_vector(p, rng, frame);
  const Vector jx = p.apply_J(x);
  const double jx_norm = p.norm(jx);
  const Vector jx_unit = jx / jx_norm;
  for (;;) {
    Vector y = frame * rng.gaussian_vector(p.dim());
    for (int pass = 0; pass < 2; ++pass) {
      y -= p.inner(x, y) * x;
      y -= p.inner(jx_unit, y) * jx_unit;
    }
    const double norm = p.norm(y);
    if (norm > 1e-8) return {x, y / norm};
  }
}

}  // namespace nkcurv
