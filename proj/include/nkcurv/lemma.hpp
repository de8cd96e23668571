#pragma once

// Linear-algebra form of the vanishing lemma: tensors satisfying the four
// algebraic conditions that vanish on every holomorphic and antiholomorphic
// plane of a finite canonical set must be zero.

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "nkcurv/four_tensor.hpp"
#include "nkcurv/hermitian.hpp"
#include "nkcurv/invariants.hpp"

namespace nkcurv {

/// Basis of the tensors satisfying conditions 1-4. The antisymmetries are
/// built in by parametrising over index pairs i<j, k<l; Bianchi and
/// J-invariance are imposed as a null space.
inline std::vector<FourTensor> curvature_tensor_space(const HermitianPoint& p, double rank_tol = 1e-10) {
  const int d = p.dim();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  const int np = static_cast<int>(pairs.size());
  const int vars = np * np;

  auto basis_tensor = [&](int v) {
    const auto [i, j] = pairs[v / np];
    const auto [k, l] = pairs[v % np];
    FourTensor t(d);
    t(i, j, k, l) = 1.0;
    t(j, i, k, l) = -1.0;
    t(i, j, l, k) = -1.0;
    t(j, i, l, k) = 1.0;
    return t;
  };

  const std::size_t d4 = static_cast<std::size_t>(d) * d * d * d;
  Matrix constraints(static_cast<Eigen::Index>(2 * d4), vars);
  for (int v = 0; v < vars; ++v) {
    const FourTensor t = basis_tensor(v);
    const FourTensor tj = t.pullback(p.J());
    std::size_t row = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            constraints(static_cast<Eigen::Index>(row), v) = t(i, j, k, l) + t(j, k, i, l) + t(k, i, j, l);
            constraints(static_cast<Eigen::Index>(d4 + row), v) = t(i, j, k, l) - tj(i, j, k, l);
            ++row;
          }
  }

  Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cutoff = rank_tol * std::max(1.0, sv(0));
  std::vector<FourTensor> out;
  for (int c = 0; c < vars; ++c) {
    const double value = c < sv.size() ? sv(c) : 0.0;
    if (value > cutoff) continue;
    FourTensor t(d);
    const Vector coeff = svd.matrixV().col(c);
    for (int v = 0; v < vars; ++v)
      if (coeff(v) != 0.0) t += coeff(v) * basis_tensor(v);
    out.push_back(std::move(t));
  }
  return out;
}

/// Deterministic set of holomorphic planes (x, Jx) and antiholomorphic planes
/// built from unitary-frame vectors and their normalised sums and differences.
inline std::vector<TwoPlane> canonical_planes(const HermitianPoint& p) {
  const int d = p.dim();
  const Matrix f = unitary_frame(p);
  std::vector<Vector> candidates;
  for (int a = 0; a < d; ++a) candidates.push_back(f.col(a));
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      candidates.push_back((f.col(a) + f.col(b)) / std::sqrt(2.0));
      candidates.push_back((f.col(a) - f.col(b)) / std::sqrt(2.0));
    }
  std::vector<TwoPlane> planes;
  for (const Vector& x : candidates) {
    Vector jx = p.apply_J(x);
    jx /= p.norm(jx);
    planes.push_back({x, jx});
  }
  for (const Vector& x : candidates) {
    Vector jx = p.apply_J(x);
    jx /= p.norm(jx);
    for (const Vector& v : candidates) {
      Vector y = v - p.inner(x, v) * x - p.inner(jx, v) * jx;
      const double norm = p.norm(y);
      if (norm < 0.5) continue;
      planes.push_back({x, y / norm});
    }
  }
  return planes;
}

struct LemmaKernelReport {
  int space_dimension = 0;
  int plane_count = 0;
  double largest_singular_value = 0.0;
  double smallest_singular_value = 0.0;
  int kernel_dimension = 0;
};

/// Rank of T -> (T(x,y,y,x))_planes restricted to the tensors satisfying
/// conditions 1-4. A singular value below `relative_cutoff` times the largest
/// counts toward the kernel.
inline LemmaKernelReport lemma_kernel(const HermitianPoint& p, double relative_cutoff = 1e-8) {
  const std::vector<FourTensor> space = curvature_tensor_space(p);
  const std::vector<TwoPlane> planes = canonical_planes(p);
  LemmaKernelReport out;
  out.space_dimension = static_cast<int>(space.size());
  out.plane_count = static_cast<int>(planes.size());
  if (space.empty()) return out;
  Matrix eval(static_cast<Eigen::Index>(planes.size()), static_cast<Eigen::Index>(space.size()));
  for (std::size_t r = 0; r < planes.size(); ++r)
    for (std::size_t c = 0; c < space.size(); ++c)
      eval(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          space[c](planes[r].x, planes[r].y, planes[r].y, planes[r].x);
  Eigen::JacobiSVD<Matrix> svd(eval);
  const Eigen::VectorXd sv = svd.singularValues();
  out.largest_singular_value = sv(0);
  out.smallest_singular_value = sv(sv.size() - 1);
  const Eigen::Index rank_limit = std::min(eval.rows(), eval.cols());
  out.kernel_dimension = static_cast<int>(space.size() - rank_limit);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) < relative_cutoff * out.largest_singular_value) ++out.kernel_dimension;
  return out;
}

}  // namespace nkcurv
