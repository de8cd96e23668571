#pragma once

#include <optional>

#include "nkcurv/four_tensor.hpp"
#include "nkcurv/hermitian.hpp"

namespace nkcurv {

/// Contractions of a (0,4) tensor R and of R'(x,y,z,u) = R(x,y,Jz,Ju):
///   S(y,z)  = sum_i R(e_i, y, z, e_i)
///   S'(y,z) = sum_i R(e_i, y, Jz, Je_i)
/// with tau, tau' their traces. S and S' are stored in coordinates.
struct RicciData {
  Matrix S;
  Matrix S_star;
  double tau = 0.0;
  double tau_star = 0.0;
};

/// Contractions using the supplied g-orthonormal frame (columns).
inline RicciData contractions(const FourTensor& r, const HermitianPoint& p, const Matrix& frame) {
  const int d = p.dim();
  if (r.dim() != d) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");
  if (frame.rows() != d || frame.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "frame size");
  RicciData out;
  out.S = Matrix::Zero(d, d);
  out.S_star = Matrix::Zero(d, d);
  const Matrix& j = p.J();
  for (int f = 0; f < d; ++f) {
    const Vector e = frame.col(f);
    const Vector je = j * e;
    // m1(b, c) = R(e, b, c, e); m2(b, c) = R(e, b, c, Je)
    Matrix m1 = Matrix::Zero(d, d);
    Matrix m2 = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
      if (e(a) == 0.0) continue;
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
          double s1 = 0.0, s2 = 0.0;
          for (int l = 0; l < d; ++l) {
            const double v = r(a, b, c, l);
            s1 += v * e(l);
            s2 += v * je(l);
          }
          m1(b, c) += e(a) * s1;
          m2(b, c) += e(a) * s2;
        }
    }
    out.S += m1;
    out.S_star += m2 * j;
  }
  out.tau = (frame.transpose() * out.S * frame).trace();
  out.tau_star = (frame.transpose() * out.S_star * frame).trace();
  return out;
}

inline RicciData contractions(const FourTensor& r, const HermitianPoint& p) {
  return contractions(r, p, orthonormal_frame(p));
}

/// Returns lambda when S = lambda * g within `tol`.
inline std::optional<double> einstein_constant(const RicciData& ricci, const HermitianPoint& p,
                                               double tol = kStructuralTolerance) {
  const double lambda = ricci.tau / p.dim();
  if ((ricci.S - lambda * p.g()).cwiseAbs().maxCoeff() <= tol) return lambda;
  return std::nullopt;
}

}  // namespace nkcurv
