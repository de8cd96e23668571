#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nkcurv/error.hpp"

namespace nkcurv {

/// Dense (0,4) tensor on R^d stored by coordinate components T(e_i, e_j, e_k, e_l).
class FourTensor {
 public:
  FourTensor() = default;
  explicit FourTensor(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0) {
    if (dim <= 0) throw Error(ErrorCode::InvalidDimension, "tensor dimension must be positive");
  }

  template <class F>
  static FourTensor from_components(int dim, F&& component) {
    FourTensor t(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
          for (int l = 0; l < dim; ++l) t(i, j, k, l) = component(i, j, k, l);
    return t;
  }

  int dim() const { return dim_; }

  double& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  /// Multilinear evaluation T(x, y, z, u).
  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& u) const {
    check_vector(x);
    check_vector(y);
    check_vector(z);
    check_vector(u);
    const int d = dim_;
    double total = 0.0;
    for (int i = 0; i < d; ++i) {
      if (x(i) == 0.0) continue;
      double si = 0.0;
      for (int j = 0; j < d; ++j) {
        if (y(j) == 0.0) continue;
        double sj = 0.0;
        for (int k = 0; k < d; ++k) {
          if (z(k) == 0.0) continue;
          const double* row = &data_[index(i, j, k, 0)];
          double sk = 0.0;
          for (int l = 0; l < d; ++l) sk += row[l] * u(l);
          sj += z(k) * sk;
        }
        si += y(j) * sj;
      }
      total += x(i) * si;
    }
    return total;
  }

  /// Components of the pulled-back tensor T(Ax, Ay, Az, Au).
  FourTensor pullback(const Eigen::MatrixXd& a) const {
    if (a.rows() != dim_ || a.cols() != dim_)
      throw Error(ErrorCode::DimensionMismatch, "pullback matrix size");
    FourTensor current = *this;
    // Transform one slot at a time: d^5 work instead of d^8.
    for (int slot = 0; slot < 4; ++slot) {
      FourTensor next(dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          for (int k = 0; k < dim_; ++k)
            for (int l = 0; l < dim_; ++l) {
              int idx[4] = {i, j, k, l};
              double s = 0.0;
              for (int m = 0; m < dim_; ++m) {
                int src[4] = {i, j, k, l};
                src[slot] = m;
                s += current(src[0], src[1], src[2], src[3]) * a(m, idx[slot]);
              }
              next(i, j, k, l) = s;
            }
      current = std::move(next);
    }
    return current;
  }

  double max_norm() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  FourTensor& operator+=(const FourTensor& other) {
    check_same(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  FourTensor& operator-=(const FourTensor& other) {
    check_same(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  FourTensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend FourTensor operator+(FourTensor a, const FourTensor& b) { return a += b; }
  friend FourTensor operator-(FourTensor a, const FourTensor& b) { return a -= b; }
  friend FourTensor operator*(double s, FourTensor a) { return a *= s; }
  friend FourTensor operator*(FourTensor a, double s) { return a *= s; }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ + l;
  }
  void check_vector(const Eigen::VectorXd& v) const {
    if (v.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "vector size does not match tensor");
  }
  void check_same(const FourTensor& other) const {
    if (other.dim_ != dim_) throw Error(ErrorCode::DimensionMismatch, "tensor dimensions differ");
  }

  int dim_ = 0;
  std::vector<double> data_;
};

inline double max_abs_difference(const FourTensor& a, const FourTensor& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "tensor dimensions differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace nkcurv
