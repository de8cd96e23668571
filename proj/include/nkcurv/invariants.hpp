#pragma once

// Pointwise curvature checks: symmetries, the vanishing lemma, contractions,
// constant antiholomorphic curvature decomposition and model classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "nkcurv/constructors.hpp"
#include "nkcurv/four_tensor.hpp"
#include "nkcurv/hermitian.hpp"
#include "nkcurv/ricci.hpp"

namespace nkcurv {

inline double sectional(const FourTensor& r, const HermitianPoint& p, const TwoPlane& plane,
                        double tol = kStructuralTolerance) {
  require_orthonormal(p, plane, tol);
  return r(plane.x, plane.y, plane.y, plane.x);
}

/// Max violation of the four algebraic conditions over coordinate index tuples:
///  c1: T(x,y,z,u) = -T(y,x,z,u)
///  c2: T(x,y,z,u) + T(y,z,x,u) + T(z,x,y,u) = 0
///  c3: T(x,y,z,u) = -T(x,y,u,z)
///  c4: T(x,y,z,u) = T(Jx,Jy,Jz,Ju)
struct SymmetryDefects {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;

  double max() const { return std::max({c1, c2, c3, c4}); }
};

inline double rk_defect(const FourTensor& r, const HermitianPoint& p) {
  if (r.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");
  return max_abs_difference(r, r.pullback(p.J()));
}

inline double bianchi_defect(const FourTensor& t) {
  const int d = t.dim();
  double m = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          m = std::max(m, std::abs(t(i, j, k, l) + t(j, k, i, l) + t(k, i, j, l)));
  return m;
}

inline SymmetryDefects symmetry_defects(const FourTensor& t, const HermitianPoint& p) {
  if (t.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");
  SymmetryDefects out;
  const int d = t.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const double v = t(i, j, k, l);
          out.c1 = std::max(out.c1, std::abs(v + t(j, i, k, l)));
          out.c3 = std::max(out.c3, std::abs(v + t(i, j, l, k)));
        }
  out.c2 = bianchi_defect(t);
  out.c4 = rk_defect(t, p);
  return out;
}

/// Random draws used by the sampling checks. Each sample owns its own
/// counter stream, so the result is independent of evaluation order.
struct SamplingBudget {
  int samples = 200;
  int refine_steps = 20;
};

struct LemmaDefect {
  double condition5_defect = 0.0;
  double tensor_norm = 0.0;
};

/// Evaluates T(x,y,y,x) over sampled holomorphic and antiholomorphic planes.
/// Conditions 1-4 are hypotheses: their failure is an error, not a defect.
inline LemmaDefect lemma_defect(const FourTensor& t, const HermitianPoint& p, int plane_budget,
                                std::uint64_t seed, double tol = kStructuralTolerance) {
  if (plane_budget < 1) throw Error(ErrorCode::InvalidArgument, "plane budget must be positive");
  const SymmetryDefects sym = symmetry_defects(t, p);
  if (sym.max() > tol)
    throw Error(ErrorCode::HypothesisViolation,
                "tensor violates conditions 1-4 (max defect " + std::to_string(sym.max()) + ")");
  LemmaDefect out;
  out.tensor_norm = t.max_norm();
  const Matrix frame = orthonormal_frame(p);
  for (int s = 0; s < plane_budget; ++s) {
    TwoPlane plane;
    if (s % 2 == 0 || p.dim() < 4) {
      CounterRng rng(seed, 0x4010000ULL + static_cast<std::uint64_t>(s));
      plane.x = sample_unit_vector(p, rng, frame);
      plane.y = p.apply_J(plane.x);
      plane.y /= p.norm(plane.y);
    } else {
      plane = sample_antiholomorphic_plane(p, seed, 0x4020000ULL + static_cast<std::uint64_t>(s));
    }
    out.condition5_defect = std::max(out.condition5_defect, std::abs(sectional(t, p, plane, tol)));
  }
  return out;
}

namespace detail {

/// Skew generators of the unitary group in a unitary frame: each satisfies
/// A^3 = -A, so exp(tA) = I + sin(t) A + (1 - cos(t)) A^2.
inline std::vector<Matrix> unitary_generators(int n) {
  std::vector<Matrix> out;
  const int d = 2 * n;
  for (int k = 0; k < n; ++k) {
    Matrix a = Matrix::Zero(d, d);
    a(2 * k + 1, 2 * k) = 1.0;
    a(2 * k, 2 * k + 1) = -1.0;
    out.push_back(a);
  }
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      Matrix real = Matrix::Zero(d, d);
      real(2 * k, 2 * l) = -1.0;
      real(2 * k + 1, 2 * l + 1) = -1.0;
      real(2 * l, 2 * k) = 1.0;
      real(2 * l + 1, 2 * k + 1) = 1.0;
      out.push_back(real);
      Matrix imag = Matrix::Zero(d, d);
      imag(2 * k, 2 * l + 1) = -1.0;
      imag(2 * k + 1, 2 * l) = 1.0;
      imag(2 * l, 2 * k + 1) = -1.0;
      imag(2 * l + 1, 2 * k) = 1.0;
      out.push_back(imag);
    }
  return out;
}

inline TwoPlane reproject_antiholomorphic(const HermitianPoint& p, TwoPlane plane) {
  plane.x /= p.norm(plane.x);
  Vector jx = p.apply_J(plane.x);
  jx /= p.norm(jx);
  for (int pass = 0; pass < 2; ++pass) {
    plane.y -= p.inner(plane.x, plane.y) * plane.x;
    plane.y -= p.inner(jx, plane.y) * jx;
  }
  plane.y /= p.norm(plane.y);
  return plane;
}

}  // namespace detail

struct CurvatureRange {
  double nu_min = 0.0;
  double nu_max = 0.0;
};

/// Extremes of the sectional curvature over antiholomorphic planes: seeded
/// sampling, then coordinate ascent/descent along one-parameter unitary
/// rotations, which map antiholomorphic planes to antiholomorphic planes.
inline CurvatureRange antiholo_range(const FourTensor& r, const HermitianPoint& p,
                                     const SamplingBudget& budget, std::uint64_t seed,
                                     int refine_candidates = 4) {
  if (p.dim() < 4)
    throw Error(ErrorCode::InvalidDimension, "antiholomorphic planes need dimension >= 4");
  if (r.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");
  if (budget.samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be positive");

  struct Candidate {
    TwoPlane plane;
    double value;
    int index;
  };
  std::vector<Candidate> pool;
  pool.reserve(budget.samples);
  for (int s = 0; s < budget.samples; ++s) {
    TwoPlane plane = sample_antiholomorphic_plane(p, seed, static_cast<std::uint64_t>(s));
    const double k = r(plane.x, plane.y, plane.y, plane.x);
    pool.push_back({std::move(plane), k, s});
  }

  const Matrix frame = unitary_frame(p);
  const Matrix to_frame = frame.transpose() * p.g();
  std::vector<Matrix> moves;
  for (const Matrix& a : detail::unitary_generators(p.n()))
    moves.push_back(frame * a * to_frame);

  // Each generator keeps its own step: doubled after an accepted move,
  // halved after a rejected one.
  auto refine = [&](Candidate c, double direction) {
    std::vector<double> steps(moves.size(), 0.5);
    for (int it = 0; it < budget.refine_steps; ++it) {
      for (std::size_t m = 0; m < moves.size(); ++m) {
        const Matrix& a = moves[m];
        const Matrix a2 = a * a;
        bool improved = false;
        for (double sign : {1.0, -1.0}) {
          const double t = sign * steps[m];
          auto rotate = [&](const Vector& v) -> Vector {
            return v + std::sin(t) * (a * v) + (1.0 - std::cos(t)) * (a2 * v);
          };
          TwoPlane trial = detail::reproject_antiholomorphic(p, {rotate(c.plane.x), rotate(c.plane.y)});
          const double k = r(trial.x, trial.y, trial.y, trial.x);
          if (direction * (k - c.value) > 0.0) {
            c.plane = std::move(trial);
            c.value = k;
            improved = true;
            break;
          }
        }
        steps[m] = improved ? std::min(2.0 * steps[m], 1.0) : 0.5 * steps[m];
      }
    }
    return c.value;
  };

  auto by_value = [](const Candidate& a, const Candidate& b) {
    return a.value < b.value || (a.value == b.value && a.index < b.index);
  };
  std::sort(pool.begin(), pool.end(), by_value);
  const int m = std::min<int>(refine_candidates, static_cast<int>(pool.size()));
  CurvatureRange out{pool.front().value, pool.back().value};
  for (int i = 0; i < m; ++i) {
    out.nu_min = std::min(out.nu_min, refine(pool[i], -1.0));
    out.nu_max = std::max(out.nu_max, refine(pool[pool.size() - 1 - i], 1.0));
  }
  return out;
}

/// R = (1/6) psi(S) + nu R1 - ((2n-1)/3) nu R2
inline FourTensor reconstruct_R(const Matrix& s, double nu, const HermitianPoint& p,
                                double tol = kStructuralTolerance) {
  if (p.dim() < 4) throw Error(ErrorCode::InvalidDimension, "reconstruction needs dimension >= 4");
  const double n = p.n();
  return (1.0 / 6.0) * build_psi(p, s, tol) + nu * build_R1(p) - ((2.0 * n - 1.0) / 3.0) * nu * build_R2(p);
}

/// nu = ((2n+1) tau - 3 tau') / (8 n (n^2 - 1))
inline double nu_from_scalars(const RicciData& ricci, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidDimension, "nu from scalar curvatures needs n >= 2");
  const double nn = n;
  return ((2.0 * nn + 1.0) * ricci.tau - 3.0 * ricci.tau_star) / (8.0 * nn * (nn * nn - 1.0));
}

struct Prop1Report {
  double nu_hat = 0.0;
  double nu_min = 0.0;
  double nu_max = 0.0;
  double eq6_residual = 0.0;
  double eq7_defect = 0.0;
  double eq9_max_defect = 0.0;
  double rk_defect = 0.0;
  double bianchi_defect = 0.0;
  /// max |Ric(reconstruction) - S|; zero whenever S is J-invariant.
  double reconstruction_ricci_gap = 0.0;
};

inline Prop1Report prop1_report(const FourTensor& r, const HermitianPoint& p,
                                const SamplingBudget& budget, std::uint64_t seed) {
  if (p.dim() < 4) throw Error(ErrorCode::InvalidDimension, "decomposition needs dimension >= 4");
  if (r.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");
  const int n = p.n();
  const double nn = n;
  const RicciData ricci = contractions(r, p);

  Prop1Report out;
  out.nu_hat = nu_from_scalars(ricci, n);
  const CurvatureRange range = antiholo_range(r, p, budget, seed);
  out.nu_min = range.nu_min;
  out.nu_max = range.nu_max;

  // S from an RK tensor is J-invariant up to round-off; symmetrise before psi.
  const Matrix s_sym = 0.5 * (ricci.S + ricci.S.transpose());
  const FourTensor rebuilt = reconstruct_R(s_sym, out.nu_hat, p, std::max(1e-6, kStructuralTolerance));
  out.eq6_residual = max_abs_difference(r, rebuilt);
  out.reconstruction_ricci_gap = (contractions(rebuilt, p).S - s_sym).cwiseAbs().maxCoeff();

  const Matrix lhs7 = 3.0 * ricci.S_star - (nn + 1.0) * ricci.S;
  const Matrix rhs7 = (1.0 / (2.0 * nn)) * (3.0 * ricci.tau_star - (nn + 1.0) * ricci.tau) * p.g();
  out.eq7_defect = (lhs7 - rhs7).cwiseAbs().maxCoeff();

  const Matrix frame = orthonormal_frame(p);
  for (int s = 0; s < budget.samples; ++s) {
    CounterRng rng(seed, 0x9000000ULL + static_cast<std::uint64_t>(s));
    const Vector x = sample_unit_vector(p, rng, frame);
    const Vector jx = p.apply_J(x);
    const double lhs = x.dot(ricci.S * x) - r(x, jx, jx, x);
    out.eq9_max_defect = std::max(out.eq9_max_defect, std::abs(lhs - 2.0 * (nn - 1.0) * out.nu_hat));
  }
  out.rk_defect = rk_defect(r, p);
  out.bianchi_defect = bianchi_defect(r);
  return out;
}

/// S(X,X) + S(Y,Y) for unit X, Y supported in distinct product factors.
inline double eq13_value(const ProductSpec& spec, const Vector& x, const Vector& y,
                         double tol = kStructuralTolerance) {
  const HermitianPoint& p = spec.combined;
  if (x.size() != p.dim() || y.size() != p.dim())
    throw Error(ErrorCode::DimensionMismatch, "vectors do not match the product dimension");
  const int fx = spec.supporting_factor(x, tol);
  const int fy = spec.supporting_factor(y, tol);
  if (fx < 0 || fy < 0 || fx == fy)
    throw Error(ErrorCode::InvalidArgument, "X and Y must lie in distinct factors");
  if (std::abs(p.norm(x) - 1.0) > std::max(tol, 1e-9) || std::abs(p.norm(y) - 1.0) > std::max(tol, 1e-9))
    throw Error(ErrorCode::InvalidArgument, "X and Y must be unit vectors");
  const RicciData ricci = contractions(spec.curvature, p);
  return x.dot(ricci.S * x) + y.dot(ricci.S * y);
}

enum class ModelLabel { Cn, CPn, CDn, S6, NonConstant, Indeterminate };

inline const char* to_string(ModelLabel label) {
  switch (label) {
    case ModelLabel::Cn: return "Cn";
    case ModelLabel::CPn: return "CPn";
    case ModelLabel::CDn: return "CDn";
    case ModelLabel::S6: return "S6";
    case ModelLabel::NonConstant: return "NonConstant";
    case ModelLabel::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct ClassLabel {
  ModelLabel label = ModelLabel::Indeterminate;
  double nu = 0.0;
  /// Mean holomorphic sectional curvature over sampled unit vectors.
  double holomorphic_curvature_estimate = 0.0;
  double tau_gap = 0.0;
  double nu_min = 0.0;
  double nu_max = 0.0;
};

/// Decision tree over pointwise data of dimension >= 6. NonConstant wins over
/// every model label; Indeterminate is returned instead of guessing.
inline ClassLabel classify(const FourTensor& r, const HermitianPoint& p, const SamplingBudget& budget,
                           std::uint64_t seed, double tol = kStructuralTolerance) {
  if (p.dim() < 6)
    throw Error(ErrorCode::InvalidDimension, "classification is stated for dimension > 4");
  if (r.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor and point dimensions differ");

  ClassLabel out;
  const RicciData ricci = contractions(r, p);
  out.nu = nu_from_scalars(ricci, p.n());
  out.tau_gap = ricci.tau - ricci.tau_star;
  const CurvatureRange range = antiholo_range(r, p, budget, seed);
  out.nu_min = range.nu_min;
  out.nu_max = range.nu_max;

  const Matrix frame = orthonormal_frame(p);
  double sum = 0.0;
  for (int s = 0; s < budget.samples; ++s) {
    CounterRng rng(seed, 0xa000000ULL + static_cast<std::uint64_t>(s));
    const Vector x = sample_unit_vector(p, rng, frame);
    const Vector jx = p.apply_J(x);
    sum += r(x, jx, jx, x);
  }
  out.holomorphic_curvature_estimate = sum / budget.samples;

  if (range.nu_max - range.nu_min > tol) {
    out.label = ModelLabel::NonConstant;
  } else if (r.max_norm() <= tol) {
    out.label = ModelLabel::Cn;
  } else if (rk_defect(r, p) <= tol && std::abs(out.tau_gap) <= tol) {
    if (out.nu > tol)
      out.label = ModelLabel::CPn;
    else if (out.nu < -tol)
      out.label = ModelLabel::CDn;
    else
      out.label = ModelLabel::Cn;
  } else if (p.dim() == 6 && max_abs_difference(r, out.nu * build_R1(p)) <= tol) {
    out.label = ModelLabel::S6;
  } else {
    out.label = ModelLabel::Indeterminate;
  }
  return out;
}

}  // namespace nkcurv
