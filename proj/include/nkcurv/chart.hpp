#pragma once

// Local charts of the model manifolds: a metric field g(u) and an almost
// complex structure field J(u) on a coordinate box, with derivative jets
// either exact (forward-mode differentiation of closed-form expressions) or
// from central differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nkcurv/constructors.hpp"
#include "nkcurv/dual.hpp"
#include "nkcurv/hermitian.hpp"

namespace nkcurv {

/// Metric field derivatives at a point, flat row-major arrays:
///   g[i*d+j], dg[(a*d+i)*d+j], d2g[((a*d+b)*d+i)*d+j], d3g[(((a*d+b)*d+c)*d+i)*d+j]
struct MetricJet {
  int dim = 0;
  std::vector<double> g, dg, d2g, d3g;

  explicit MetricJet(int d = 0)
      : dim(d),
        g(static_cast<std::size_t>(d) * d),
        dg(static_cast<std::size_t>(d) * d * d),
        d2g(static_cast<std::size_t>(d) * d * d * d),
        d3g(static_cast<std::size_t>(d) * d * d * d * d) {}
};

/// J field and its first derivatives: J[i*d+j] = J^i_j, dJ[(a*d+i)*d+j].
struct StructureJet {
  int dim = 0;
  std::vector<double> J, dJ;

  explicit StructureJet(int d = 0)
      : dim(d), J(static_cast<std::size_t>(d) * d), dJ(static_cast<std::size_t>(d) * d * d) {}
};

enum class ChartKind { Parametric, EmbeddedSphere };

inline const char* to_string(ChartKind kind) {
  return kind == ChartKind::Parametric ? "parametric" : "embedded-sphere";
}

/// Gnomonic chart of the unit S^6 centred at `base`: u -> (base + F u) / |base + F u|.
struct SphereEmbedding {
  Vector base;   // unit 7-vector
  Matrix frame;  // 7x6 orthonormal basis of base^perp

  template <class T>
  std::vector<T> embed(const std::vector<T>& u) const {
    std::vector<T> w(7);
    T r2 = T(1.0);
    for (int k = 0; k < 6; ++k) r2 = r2 + u[k] * u[k];
    using std::sqrt;
    const T inv_r = T(1.0) / sqrt(r2);
    for (int i = 0; i < 7; ++i) {
      T s = T(base(i));
      for (int k = 0; k < 6; ++k) s = s + frame(i, k) * u[k];
      w[i] = s * inv_r;
    }
    return w;
  }

  Vector embed(const Vector& u) const {
    std::vector<double> uu(u.data(), u.data() + u.size());
    const auto w = embed<double>(uu);
    return Eigen::Map<const Vector>(w.data(), 7);
  }

  /// Ambient images of the coordinate vectors d/du_a (7x6, columns).
  Matrix tangent_basis(const Vector& u) const {
    Matrix out(7, 6);
    for (int a = 0; a < 6; ++a) {
      std::vector<Dual<double>> x(6);
      for (int k = 0; k < 6; ++k) x[k] = Dual<double>(u(k), k == a ? 1.0 : 0.0);
      const auto w = embed(x);
      for (int i = 0; i < 7; ++i) out(i, a) = w[i].d;
    }
    return out;
  }
};

class Chart {
 public:
  std::string name;
  ChartKind kind = ChartKind::Parametric;
  int dim = 0;
  Vector lower;
  Vector upper;
  std::function<Matrix(const Vector&)> metric;
  std::function<Matrix(const Vector&)> complex_structure;
  /// Exact derivative oracles; empty for charts that rely on finite differences.
  std::function<MetricJet(const Vector&)> analytic_metric_jet;
  std::function<StructureJet(const Vector&)> analytic_structure_jet;
  std::optional<SphereEmbedding> sphere;

  bool has_analytic_derivatives() const {
    return static_cast<bool>(analytic_metric_jet) && static_cast<bool>(analytic_structure_jet);
  }

  HermitianPoint point_structure(const Vector& u) const {
    return HermitianPoint(metric(u), complex_structure(u));
  }

  Vector center() const { return 0.5 * (lower + upper); }
};

namespace detail {

template <class T>
std::vector<T> to_scalar_vector(const Vector& u) {
  std::vector<T> out(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) out[static_cast<std::size_t>(i)] = T(u(i));
  return out;
}

inline Matrix to_matrix(const std::vector<double>& flat, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat[static_cast<std::size_t>(i) * d + j];
  return m;
}

}  // namespace detail

/// Exact third-order metric jet by triple-nested forward differentiation.
template <class Model>
MetricJet autodiff_metric_jet(const Model& model, const Vector& u) {
  using D1 = Dual<double>;
  using D2 = Dual<D1>;
  using D3 = Dual<D2>;
  const int d = model.dim();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  MetricJet jet(d);
  auto at = [dd](std::size_t block) { return block * dd; };
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      for (int c = b; c < d; ++c) {
        std::vector<D3> x(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
          const double sa = k == a ? 1.0 : 0.0, sb = k == b ? 1.0 : 0.0, sc = k == c ? 1.0 : 0.0;
          x[k] = D3(D2(D1(u(k), sa), D1(sb, 0.0)), D2(D1(sc, 0.0), D1(0.0, 0.0)));
        }
        const std::vector<D3> m = model.template metric<D3>(x);
        for (std::size_t e = 0; e < dd; ++e) {
          const D3& f = m[e];
          jet.g[e] = f.v.v.v;
          jet.dg[at(a) + e] = f.v.v.d;
          jet.dg[at(b) + e] = f.v.d.v;
          jet.dg[at(c) + e] = f.d.v.v;
          auto set2 = [&](int i, int j, double value) {
            jet.d2g[at(static_cast<std::size_t>(i) * d + j) + e] = value;
            jet.d2g[at(static_cast<std::size_t>(j) * d + i) + e] = value;
          };
          set2(a, b, f.v.d.d);
          set2(a, c, f.d.v.d);
          set2(b, c, f.d.d.v);
          const int idx[3] = {a, b, c};
          const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
          for (const auto& pm : perms) {
            const std::size_t block =
                (static_cast<std::size_t>(idx[pm[0]]) * d + idx[pm[1]]) * d + idx[pm[2]];
            jet.d3g[at(block) + e] = f.d.d.d;
          }
        }
      }
  return jet;
}

template <class Model>
StructureJet autodiff_structure_jet(const Model& model, const Vector& u) {
  using D1 = Dual<double>;
  const int d = model.dim();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  StructureJet jet(d);
  for (int a = 0; a < d; ++a) {
    std::vector<D1> x(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) x[k] = D1(u(k), k == a ? 1.0 : 0.0);
    const std::vector<D1> j = model.template complex_structure<D1>(x);
    for (std::size_t e = 0; e < dd; ++e) {
      jet.J[e] = j[e].v;
      jet.dJ[static_cast<std::size_t>(a) * dd + e] = j[e].d;
    }
  }
  return jet;
}

struct FiniteDifferenceOptions {
  double step = 1e-3;             // first derivatives
  double high_order_step = 1e-2;  // second and third derivatives
  bool richardson = true;
};

namespace detail {

/// Product of central differences along `dirs` with spacing h.
inline Matrix central_product(const std::function<Matrix(const Vector&)>& f, const Vector& u,
                              const std::vector<int>& dirs, double h) {
  const int k = static_cast<int>(dirs.size());
  Matrix total;
  for (int mask = 0; mask < (1 << k); ++mask) {
    Vector x = u;
    double sign = 1.0;
    for (int i = 0; i < k; ++i) {
      const double s = (mask >> i) & 1 ? -1.0 : 1.0;
      sign *= s;
      x(dirs[i]) += s * h;
    }
    const Matrix value = f(x);
    if (mask == 0)
      total = sign * value;
    else
      total += sign * value;
  }
  return total / std::pow(2.0 * h, k);
}

inline Matrix fd_derivative(const std::function<Matrix(const Vector&)>& f, const Vector& u,
                            const std::vector<int>& dirs, double h, bool richardson) {
  if (!richardson) return central_product(f, u, dirs, h);
  const Matrix coarse = central_product(f, u, dirs, h);
  const Matrix fine = central_product(f, u, dirs, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

inline void store(std::vector<double>& dst, std::size_t offset, const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) dst[offset + static_cast<std::size_t>(i) * d + j] = m(i, j);
}

}  // namespace detail

inline MetricJet fd_metric_jet(const std::function<Matrix(const Vector&)>& metric, const Vector& u,
                               const FiniteDifferenceOptions& opt) {
  const int d = static_cast<int>(u.size());
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  MetricJet jet(d);
  detail::store(jet.g, 0, metric(u));
  for (int a = 0; a < d; ++a)
    detail::store(jet.dg, a * dd, detail::fd_derivative(metric, u, {a}, opt.step, opt.richardson));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      const Matrix m = detail::fd_derivative(metric, u, {a, b}, opt.high_order_step, opt.richardson);
      detail::store(jet.d2g, (static_cast<std::size_t>(a) * d + b) * dd, m);
      detail::store(jet.d2g, (static_cast<std::size_t>(b) * d + a) * dd, m);
    }
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      for (int c = b; c < d; ++c) {
        const Matrix m = detail::fd_derivative(metric, u, {a, b, c}, opt.high_order_step, opt.richardson);
        const int idx[3] = {a, b, c};
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& pm : perms) {
          const std::size_t block = (static_cast<std::size_t>(idx[pm[0]]) * d + idx[pm[1]]) * d + idx[pm[2]];
          detail::store(jet.d3g, block * dd, m);
        }
      }
  return jet;
}

inline StructureJet fd_structure_jet(const std::function<Matrix(const Vector&)>& j_field, const Vector& u,
                                     const FiniteDifferenceOptions& opt) {
  const int d = static_cast<int>(u.size());
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  StructureJet jet(d);
  detail::store(jet.J, 0, j_field(u));
  for (int a = 0; a < d; ++a)
    detail::store(jet.dJ, a * dd, detail::fd_derivative(j_field, u, {a}, opt.step, opt.richardson));
  return jet;
}

// ---------------------------------------------------------------------------
// Closed-form models. Each exposes dim() and generic metric<T>/complex_structure<T>
// returning flat row-major d x d arrays.

struct FlatModel {
  int n = 1;
  int dim() const { return 2 * n; }

  template <class T>
  std::vector<T> metric(const std::vector<T>&) const {
    const int d = dim();
    std::vector<T> g(static_cast<std::size_t>(d) * d, T(0.0));
    for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i) * d + i] = T(1.0);
    return g;
  }

  template <class T>
  std::vector<T> complex_structure(const std::vector<T>&) const {
    const int d = dim();
    std::vector<T> j(static_cast<std::size_t>(d) * d, T(0.0));
    for (int k = 0; k < n; ++k) {
      j[static_cast<std::size_t>(2 * k + 1) * d + 2 * k] = T(1.0);
      j[static_cast<std::size_t>(2 * k) * d + 2 * k + 1] = T(-1.0);
    }
    return j;
  }
};

/// Complex space form of holomorphic sectional curvature c in affine
/// coordinates z_k = u_{2k} + i u_{2k+1}, with s = c/4 and r = 1 + s|z|^2:
///   g = I / r - (s / r^2) (u u^T + (J0 u)(J0 u)^T),   J = J0.
/// c > 0 is the Fubini-Study metric, c < 0 the complex hyperbolic (Bergman) metric.
struct ComplexSpaceFormModel {
  int n = 1;
  double c = 4.0;
  int dim() const { return 2 * n; }

  template <class T>
  std::vector<T> metric(const std::vector<T>& u) const {
    const int d = dim();
    const double s = c / 4.0;
    T norm2 = T(0.0);
    for (int i = 0; i < d; ++i) norm2 = norm2 + u[i] * u[i];
    const T r = T(1.0) + s * norm2;
    const T inv_r = T(1.0) / r;
    const T w = s * inv_r * inv_r;
    std::vector<T> ju(static_cast<std::size_t>(d));
    for (int k = 0; k < n; ++k) {
      ju[2 * k] = -u[2 * k + 1];
      ju[2 * k + 1] = u[2 * k];
    }
    std::vector<T> g(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        T v = -(w * (u[i] * u[j] + ju[i] * ju[j]));
        if (i == j) v = v + inv_r;
        g[static_cast<std::size_t>(i) * d + j] = v;
      }
    return g;
  }

  template <class T>
  std::vector<T> complex_structure(const std::vector<T>& u) const {
    return FlatModel{n}.complex_structure(u);
  }
};

/// Round S^6 in gnomonic coordinates with the octonionic structure
/// J(v) = p × v pulled back to coordinates.
struct SphereModel {
  SphereEmbedding embedding;
  int dim() const { return 6; }

  template <class T>
  std::vector<T> metric(const std::vector<T>& u) const {
    // g = I / r^2 - u u^T / r^4 with r^2 = 1 + |u|^2
    T r2 = T(1.0);
    for (int k = 0; k < 6; ++k) r2 = r2 + u[k] * u[k];
    const T inv = T(1.0) / r2;
    const T inv2 = inv * inv;
    std::vector<T> g(36);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        T v = -(u[i] * u[j] * inv2);
        if (i == j) v = v + inv;
        g[i * 6 + j] = v;
      }
    return g;
  }

  template <class T>
  std::vector<T> complex_structure(const std::vector<T>& u) const {
    T r2 = T(1.0);
    for (int k = 0; k < 6; ++k) r2 = r2 + u[k] * u[k];
    using std::sqrt;
    const T r = sqrt(r2);
    const T inv_r = T(1.0) / r;
    const T inv_r3 = inv_r * inv_r * inv_r;
    std::vector<T> w(7);
    for (int i = 0; i < 7; ++i) {
      T s = T(embedding.base(i));
      for (int k = 0; k < 6; ++k) s = s + embedding.frame(i, k) * u[k];
      w[i] = s;
    }
    std::vector<T> p(7);
    for (int i = 0; i < 7; ++i) p[i] = w[i] * inv_r;
    // d p / d u_a = f_a / r - w u_a / r^3
    std::vector<std::vector<T>> tangent(6, std::vector<T>(7));
    for (int a = 0; a < 6; ++a)
      for (int i = 0; i < 7; ++i) tangent[a][i] = embedding.frame(i, a) * inv_r - w[i] * u[a] * inv_r3;
    // g^{-1} = r^2 (I + u u^T)
    std::vector<T> jmat(36);
    for (int a = 0; a < 6; ++a) {
      const std::vector<T> image = cross7(p, tangent[a]);
      std::vector<T> proj(6);
      for (int b = 0; b < 6; ++b) {
        T s = T(0.0);
        for (int i = 0; i < 7; ++i) s = s + tangent[b][i] * image[i];
        proj[b] = s;
      }
      T udot = T(0.0);
      for (int b = 0; b < 6; ++b) udot = udot + u[b] * proj[b];
      for (int b = 0; b < 6; ++b) jmat[b * 6 + a] = r2 * (proj[b] + u[b] * udot);
    }
    return jmat;
  }
};

/// g(u) = I + sum of linear, quadratic and cubic monomials with random
/// symmetric coefficients; J = L^{-T} J0 L^T where g = L L^T, which is
/// g-orthogonal with J^2 = -I but not integrable in general.
struct PolynomialModel {
  int d = 4;
  // coefficient blocks: linear[k], quadratic[k<=l], cubic[k<=l<=m], each d x d symmetric
  std::vector<Matrix> linear;
  std::vector<Matrix> quadratic;
  std::vector<Matrix> cubic;
  std::vector<std::array<int, 2>> quadratic_index;
  std::vector<std::array<int, 3>> cubic_index;

  int dim() const { return d; }

  static PolynomialModel random(int dim, std::uint64_t seed, double amplitude) {
    PolynomialModel m;
    m.d = dim;
    CounterRng rng(seed, 0x9017);
    auto sym = [&]() {
      Matrix a(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.gaussian();
      return Matrix(amplitude * 0.5 * (a + a.transpose()));
    };
    for (int k = 0; k < dim; ++k) m.linear.push_back(sym());
    for (int k = 0; k < dim; ++k)
      for (int l = k; l < dim; ++l) {
        m.quadratic.push_back(sym());
        m.quadratic_index.push_back({k, l});
      }
    for (int k = 0; k < dim; ++k)
      for (int l = k; l < dim; ++l)
        for (int n = l; n < dim; ++n) {
          m.cubic.push_back(sym());
          m.cubic_index.push_back({k, l, n});
        }
    return m;
  }

  template <class T>
  std::vector<T> metric(const std::vector<T>& u) const {
    std::vector<T> g(static_cast<std::size_t>(d) * d, T(0.0));
    for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i) * d + i] = T(1.0);
    auto add = [&](const Matrix& coeff, const T& weight) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g[static_cast<std::size_t>(i) * d + j] += coeff(i, j) * weight;
    };
    for (int k = 0; k < d; ++k) add(linear[k], u[k]);
    for (std::size_t q = 0; q < quadratic.size(); ++q)
      add(quadratic[q], u[quadratic_index[q][0]] * u[quadratic_index[q][1]]);
    for (std::size_t q = 0; q < cubic.size(); ++q)
      add(cubic[q], u[cubic_index[q][0]] * u[cubic_index[q][1]] * u[cubic_index[q][2]]);
    return g;
  }

  template <class T>
  std::vector<T> complex_structure(const std::vector<T>& u) const {
    const std::vector<T> g = metric(u);
    // Cholesky g = L L^T
    std::vector<T> l(static_cast<std::size_t>(d) * d, T(0.0));
    using std::sqrt;
    for (int j = 0; j < d; ++j) {
      T diag = g[static_cast<std::size_t>(j) * d + j];
      for (int k = 0; k < j; ++k) diag = diag - l[j * d + k] * l[j * d + k];
      const T ljj = sqrt(diag);
      l[j * d + j] = ljj;
      for (int i = j + 1; i < d; ++i) {
        T s = g[static_cast<std::size_t>(i) * d + j];
        for (int k = 0; k < j; ++k) s = s - l[i * d + k] * l[j * d + k];
        l[i * d + j] = s / ljj;
      }
    }
    // M = J0 L^T, then solve L^T X = M for X = L^{-T} J0 L^T
    const std::vector<T> j0 = FlatModel{d / 2}.complex_structure(u);
    std::vector<T> m(static_cast<std::size_t>(d) * d, T(0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        T s = T(0.0);
        for (int k = 0; k < d; ++k) s = s + j0[i * d + k] * l[j * d + k];
        m[i * d + j] = s;
      }
    std::vector<T> x(static_cast<std::size_t>(d) * d, T(0.0));
    for (int col = 0; col < d; ++col)
      for (int i = d - 1; i >= 0; --i) {
        T s = m[i * d + col];
        for (int k = i + 1; k < d; ++k) s = s - l[k * d + i] * x[k * d + col];
        x[i * d + col] = s / l[i * d + i];
      }
    return x;
  }
};

template <class Model>
Chart make_analytic_chart(const Model& model, std::string name, ChartKind kind, Vector lower, Vector upper) {
  Chart chart;
  chart.name = std::move(name);
  chart.kind = kind;
  chart.dim = model.dim();
  chart.lower = std::move(lower);
  chart.upper = std::move(upper);
  const int d = model.dim();
  chart.metric = [model, d](const Vector& u) {
    return detail::to_matrix(model.template metric<double>(detail::to_scalar_vector<double>(u)), d);
  };
  chart.complex_structure = [model, d](const Vector& u) {
    return detail::to_matrix(model.template complex_structure<double>(detail::to_scalar_vector<double>(u)), d);
  };
  chart.analytic_metric_jet = [model](const Vector& u) { return autodiff_metric_jet(model, u); };
  chart.analytic_structure_jet = [model](const Vector& u) { return autodiff_structure_jet(model, u); };
  return chart;
}

inline Chart flat_chart(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "n must be at least 1");
  const int d = 2 * n;
  return make_analytic_chart(FlatModel{n}, "flat C^" + std::to_string(n), ChartKind::Parametric,
                             Vector::Constant(d, -1.0), Vector::Constant(d, 1.0));
}

/// Complex space form chart; for c < 0 the box stays well inside the ball |z|^2 < 4/|c|.
inline Chart complex_space_form_chart(int n, double c) {
  if (n < 1) throw Error(ErrorCode::InvalidDimension, "n must be at least 1");
  const int d = 2 * n;
  const double half_width = c < 0.0 ? std::sqrt(0.5 / ((std::abs(c) / 4.0) * d)) : 1.0;
  std::string name = c > 0.0 ? "Fubini-Study CP^" : (c < 0.0 ? "complex hyperbolic CD^" : "flat C^");
  return make_analytic_chart(ComplexSpaceFormModel{n, c}, name + std::to_string(n), ChartKind::Parametric,
                             Vector::Constant(d, -half_width), Vector::Constant(d, half_width));
}

inline Chart sphere_chart(const Vector& base, std::uint64_t frame_seed) {
  if (base.size() != 7) throw Error(ErrorCode::DimensionMismatch, "S^6 base point must be a 7-vector");
  const Vector p = base / base.norm();
  SphereEmbedding emb{p, s6_tangent_frame(p, frame_seed, 1e-6)};
  Chart chart = make_analytic_chart(SphereModel{emb}, "S^6 (octonionic)", ChartKind::EmbeddedSphere,
                                    Vector::Constant(6, -0.5), Vector::Constant(6, 0.5));
  chart.sphere = emb;
  return chart;
}

/// Random polynomial perturbation of the flat metric. With `analytic` false
/// the chart carries no derivative oracles and geometry falls back to
/// finite differences, like a user-supplied chart.
inline Chart polynomial_chart(int dim, std::uint64_t seed, double amplitude = 0.05, bool analytic = true) {
  if (dim < 2 || dim % 2 != 0) throw Error(ErrorCode::InvalidDimension, "chart dimension must be even");
  Chart chart = make_analytic_chart(PolynomialModel::random(dim, seed, amplitude),
                                    "polynomial metric seed " + std::to_string(seed), ChartKind::Parametric,
                                    Vector::Constant(dim, -0.5), Vector::Constant(dim, 0.5));
  if (!analytic) {
    chart.analytic_metric_jet = nullptr;
    chart.analytic_structure_jet = nullptr;
  }
  return chart;
}

/// Chart from plain callables; derivatives always by finite differences.
inline Chart user_chart(std::string name, int dim, Vector lower, Vector upper,
                        std::function<Matrix(const Vector&)> metric,
                        std::function<Matrix(const Vector&)> complex_structure) {
  if (dim < 2 || dim % 2 != 0) throw Error(ErrorCode::InvalidDimension, "chart dimension must be even");
  if (lower.size() != dim || upper.size() != dim)
    throw Error(ErrorCode::DimensionMismatch, "domain bounds must match chart dimension");
  Chart chart;
  chart.name = std::move(name);
  chart.dim = dim;
  chart.lower = std::move(lower);
  chart.upper = std::move(upper);
  chart.metric = std::move(metric);
  chart.complex_structure = std::move(complex_structure);
  return chart;
}

/// Riemannian product of two charts: block-diagonal metric and structure.
inline Chart product_chart(const Chart& a, const Chart& b) {
  const int da = a.dim, db = b.dim, d = da + db;
  Chart chart;
  chart.name = a.name + " x " + b.name;
  chart.dim = d;
  chart.lower = Vector(d);
  chart.upper = Vector(d);
  chart.lower << a.lower, b.lower;
  chart.upper << a.upper, b.upper;
  auto block = [da, db, d](const std::function<Matrix(const Vector&)>& fa,
                           const std::function<Matrix(const Vector&)>& fb) {
    return [fa, fb, da, db, d](const Vector& u) {
      Matrix m = Matrix::Zero(d, d);
      m.topLeftCorner(da, da) = fa(u.head(da));
      m.bottomRightCorner(db, db) = fb(u.tail(db));
      return m;
    };
  };
  chart.metric = block(a.metric, b.metric);
  chart.complex_structure = block(a.complex_structure, b.complex_structure);
  if (a.has_analytic_derivatives() && b.has_analytic_derivatives()) {
    // Derivatives of a block vanish along the other factor's coordinates.
    auto merge = [da, db, d](const std::vector<double>& src_a, const std::vector<double>& src_b, int order,
                             std::vector<double>& dst) {
      const std::size_t dd = static_cast<std::size_t>(d) * d;
      auto embed_factor = [&](const std::vector<double>& src, int dk, int offset) {
        const std::size_t kk = static_cast<std::size_t>(dk) * dk;
        std::size_t blocks = 1;
        for (int o = 0; o < order; ++o) blocks *= static_cast<std::size_t>(dk);
        for (std::size_t bi = 0; bi < blocks; ++bi) {
          std::size_t rest = bi, target = 0, scale = 1;
          for (int o = 0; o < order; ++o) {
            target += (rest % dk + offset) * scale;
            rest /= dk;
            scale *= static_cast<std::size_t>(d);
          }
          for (int i = 0; i < dk; ++i)
            for (int j = 0; j < dk; ++j)
              dst[target * dd + static_cast<std::size_t>(i + offset) * d + (j + offset)] =
                  src[bi * kk + static_cast<std::size_t>(i) * dk + j];
        }
      };
      embed_factor(src_a, da, 0);
      embed_factor(src_b, db, da);
    };
    auto ja = a.analytic_metric_jet, jb = b.analytic_metric_jet;
    chart.analytic_metric_jet = [ja, jb, merge, da, db, d](const Vector& u) {
      const MetricJet x = ja(u.head(da)), y = jb(u.tail(db));
      MetricJet out(d);
      merge(x.g, y.g, 0, out.g);
      merge(x.dg, y.dg, 1, out.dg);
      merge(x.d2g, y.d2g, 2, out.d2g);
      merge(x.d3g, y.d3g, 3, out.d3g);
      return out;
    };
    auto sa = a.analytic_structure_jet, sb = b.analytic_structure_jet;
    chart.analytic_structure_jet = [sa, sb, merge, da, db, d](const Vector& u) {
      const StructureJet x = sa(u.head(da)), y = sb(u.tail(db));
      StructureJet out(d);
      merge(x.J, y.J, 0, out.J);
      merge(x.dJ, y.dJ, 1, out.dJ);
      return out;
    };
  }
  return chart;
}

/// Seeded coordinates drawn uniformly from the central `fraction` of the box.
inline std::vector<Vector> sample_chart_points(const Chart& chart, int count, std::uint64_t seed,
                                               double fraction = 0.5) {
  std::vector<Vector> out;
  const Vector mid = chart.center();
  const Vector half = 0.5 * fraction * (chart.upper - chart.lower);
  for (int i = 0; i < count; ++i) {
    CounterRng rng(seed, 0xc0000ULL + static_cast<std::uint64_t>(i));
    Vector u(chart.dim);
    for (int k = 0; k < chart.dim; ++k) u(k) = mid(k) + half(k) * (2.0 * rng.uniform() - 1.0);
    out.push_back(u);
  }
  return out;
}

}  // namespace nkcurv
