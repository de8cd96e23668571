#pragma once

// Levi-Civita geometry on a chart: Christoffel symbols, curvature, Ricci
// contractions and their covariant derivatives, and the differential
// identities satisfied by Riemannian and nearly Kähler metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nkcurv/chart.hpp"
#include "nkcurv/four_tensor.hpp"
#include "nkcurv/invariants.hpp"
#include "nkcurv/ricci.hpp"

namespace nkcurv {

enum class DerivativeMode { Auto, Analytic, FiniteDifference };

struct GeometryOptions {
  FiniteDifferenceOptions fd{};
  DerivativeMode mode = DerivativeMode::Auto;
};

namespace detail {

/// Second-order metric jet and J value in a generic scalar type.
template <class T>
struct LocalJet {
  int d = 0;
  std::vector<T> g, dg, d2g, J;
};

template <class T>
struct LocalCurvature {
  std::vector<T> gamma;  // gamma[(k*d+i)*d+j] = Gamma^k_ij
  std::vector<T> R;      // R[((i*d+j)*d+k)*d+l] = R(d_i, d_j, d_k, d_l)
  std::vector<T> S, S_star;
  T tau{}, tau_star{};
};

template <class T>
std::vector<T> invert_spd(const std::vector<T>& a, int d) {
  // Gauss-Jordan without pivoting; the metric is positive definite.
  std::vector<T> m = a;
  std::vector<T> inv(static_cast<std::size_t>(d) * d, T(0.0));
  for (int i = 0; i < d; ++i) inv[i * d + i] = T(1.0);
  for (int col = 0; col < d; ++col) {
    const T pivot = m[col * d + col];
    for (int k = 0; k < d; ++k) {
      m[col * d + k] = m[col * d + k] / pivot;
      inv[col * d + k] = inv[col * d + k] / pivot;
    }
    for (int row = 0; row < d; ++row) {
      if (row == col) continue;
      const T f = m[row * d + col];
      for (int k = 0; k < d; ++k) {
        m[row * d + k] = m[row * d + k] - f * m[col * d + k];
        inv[row * d + k] = inv[row * d + k] - f * inv[col * d + k];
      }
    }
  }
  return inv;
}

template <class T>
struct Connection {
  std::vector<T> ginv;
  std::vector<T> gamma;   // [(k,i,j)]
  std::vector<T> dgamma;  // [(m,k,i,j)] = d_m Gamma^k_ij
};

/// Christoffel symbols and their first derivatives from a second-order metric jet.
template <class T>
Connection<T> connection_from_jet(const LocalJet<T>& jet) {
  const int d = jet.d;
  const std::size_t D = static_cast<std::size_t>(d);
  auto i2 = [D](std::size_t a, std::size_t b) { return a * D + b; };
  auto i3 = [D](std::size_t a, std::size_t b, std::size_t c) { return (a * D + b) * D + c; };
  auto i4 = [D](std::size_t a, std::size_t b, std::size_t c, std::size_t e) { return ((a * D + b) * D + c) * D + e; };

  Connection<T> out;
  out.ginv = invert_spd(jet.g, d);
  const std::vector<T>& ginv = out.ginv;

  // d_m g^{kl} = -g^{ka} d_m g_ab g^{bl}
  std::vector<T> dginv(D * D * D, T(0.0));
  for (std::size_t m = 0; m < D; ++m) {
    std::vector<T> tmp(D * D, T(0.0));
    for (std::size_t k = 0; k < D; ++k)
      for (std::size_t b = 0; b < D; ++b) {
        T s = T(0.0);
        for (std::size_t a = 0; a < D; ++a) s = s + ginv[i2(k, a)] * jet.dg[i3(m, a, b)];
        tmp[i2(k, b)] = s;
      }
    for (std::size_t k = 0; k < D; ++k)
      for (std::size_t l = 0; l < D; ++l) {
        T s = T(0.0);
        for (std::size_t b = 0; b < D; ++b) s = s + tmp[i2(k, b)] * ginv[i2(b, l)];
        dginv[i3(m, k, l)] = -s;
      }
  }

  // Christoffel symbols of the first kind and their derivatives.
  std::vector<T> first(D * D * D), dfirst(D * D * D * D);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t l = 0; l < D; ++l) {
        first[i3(i, j, l)] = 0.5 * (jet.dg[i3(i, j, l)] + jet.dg[i3(j, i, l)] - jet.dg[i3(l, i, j)]);
        for (std::size_t m = 0; m < D; ++m)
          dfirst[i4(m, i, j, l)] =
              0.5 * (jet.d2g[i4(m, i, j, l)] + jet.d2g[i4(m, j, i, l)] - jet.d2g[i4(m, l, i, j)]);
      }

  out.gamma.assign(D * D * D, T(0.0));
  out.dgamma.assign(D * D * D * D, T(0.0));
  for (std::size_t k = 0; k < D; ++k)
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j) {
        T s = T(0.0);
        for (std::size_t l = 0; l < D; ++l) s = s + ginv[i2(k, l)] * first[i3(i, j, l)];
        out.gamma[i3(k, i, j)] = s;
        for (std::size_t m = 0; m < D; ++m) {
          T t = T(0.0);
          for (std::size_t l = 0; l < D; ++l)
            t = t + dginv[i3(m, k, l)] * first[i3(i, j, l)] + ginv[i2(k, l)] * dfirst[i4(m, i, j, l)];
          out.dgamma[i4(m, k, i, j)] = t;
        }
      }
  return out;
}

/// Curvature, Ricci contractions and scalar curvatures from a connection.
template <class T>
LocalCurvature<T> curvature_from_connection(int d, const std::vector<T>& g, const Connection<T>& conn,
                                            const std::vector<T>& J) {
  const std::size_t D = static_cast<std::size_t>(d);
  auto i2 = [D](std::size_t a, std::size_t b) { return a * D + b; };
  auto i3 = [D](std::size_t a, std::size_t b, std::size_t c) { return (a * D + b) * D + c; };
  auto i4 = [D](std::size_t a, std::size_t b, std::size_t c, std::size_t e) { return ((a * D + b) * D + c) * D + e; };
  const std::vector<T>& ginv = conn.ginv;
  const std::vector<T>& dgamma = conn.dgamma;

  LocalCurvature<T> out;
  out.gamma = conn.gamma;

  // R(d_i, d_j) d_k = Rup^l_{ijk} d_l with
  // Rup^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik
  std::vector<T> rup(D * D * D * D);  // [(l,i,j,k)]
  for (std::size_t l = 0; l < D; ++l)
    for (std::size_t i = 0; i < D; ++i)
      for (std::size_t j = 0; j < D; ++j)
        for (std::size_t k = 0; k < D; ++k) {
          T s = dgamma[i4(i, l, j, k)] - dgamma[i4(j, l, i, k)];
          for (std::size_t p = 0; p < D; ++p)
            s = s + out.gamma[i3(l, i, p)] * out.gamma[i3(p, j, k)] - out.gamma[i3(l, j, p)] * out.gamma[i3(p, i, k)];
          rup[i4(l, i, j, k)] = s;
        }
  out.R.assign(D * D * D * D, T(0.0));
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k)
        for (std::size_t l = 0; l < D; ++l) {
          T s = T(0.0);
          for (std::size_t q = 0; q < D; ++q) s = s + g[i2(l, q)] * rup[i4(q, i, j, k)];
          out.R[i4(i, j, k, l)] = s;
        }

  // S_jk = g^{ab} R_{ajkb};  S'_jk = g^{ab} R(d_a, d_j, J d_k, J d_b)
  std::vector<T> rj(D * D * D * D, T(0.0));  // R(a, j, c, J d_b) = sum_e R_ajce J^e_b
  for (std::size_t a = 0; a < D; ++a)
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t c = 0; c < D; ++c)
        for (std::size_t b = 0; b < D; ++b) {
          T s = T(0.0);
          for (std::size_t e = 0; e < D; ++e) s = s + out.R[i4(a, j, c, e)] * J[i2(e, b)];
          rj[i4(a, j, c, b)] = s;
        }
  out.S.assign(D * D, T(0.0));
  out.S_star.assign(D * D, T(0.0));
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) {
      T s = T(0.0), s2 = T(0.0);
      for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b) {
          const T w = ginv[i2(a, b)];
          s = s + w * out.R[i4(a, j, k, b)];
          T inner = T(0.0);
          for (std::size_t c = 0; c < D; ++c) inner = inner + rj[i4(a, j, c, b)] * J[i2(c, k)];
          s2 = s2 + w * inner;
        }
      out.S[i2(j, k)] = s;
      out.S_star[i2(j, k)] = s2;
    }
  out.tau = T(0.0);
  out.tau_star = T(0.0);
  for (std::size_t j = 0; j < D; ++j)
    for (std::size_t k = 0; k < D; ++k) {
      out.tau = out.tau + ginv[i2(j, k)] * out.S[i2(j, k)];
      out.tau_star = out.tau_star + ginv[i2(j, k)] * out.S_star[i2(j, k)];
    }
  return out;
}

template <class T>
LocalCurvature<T> local_curvature(const LocalJet<T>& jet) {
  return curvature_from_connection(jet.d, jet.g, connection_from_jet(jet), jet.J);
}

}  // namespace detail

/// Curvature data of a chart at one point. Arrays are in coordinate bases:
/// christoffels[(k*d+i)*d+j] = Gamma^k_ij; nabla_R[m] = (nabla_{d_m} R);
/// nabla_S[m](j,k) = (nabla_{d_m} S)(d_j, d_k); nabla_J[m](k,j) = ((nabla_{d_m} J) d_j)^k.
struct ChartGeometry {
  Vector point;
  Matrix g;
  Matrix J;
  std::vector<double> christoffels;
  FourTensor R;
  RicciData ricci;
  Vector grad_tau;
  Vector grad_tau_star;
  std::vector<FourTensor> nabla_R;
  std::vector<Matrix> nabla_S;
  std::vector<Matrix> nabla_S_star;
  std::vector<Matrix> nabla_J;
  bool analytic = false;
  /// Curvature from the Gauss equation (embedded charts only).
  std::optional<FourTensor> gauss_R;

  int dim() const { return static_cast<int>(g.rows()); }
  double christoffel(int k, int i, int j) const {
    const std::size_t d = static_cast<std::size_t>(dim());
    return christoffels[(k * d + i) * d + j];
  }
  HermitianPoint structure() const { return HermitianPoint(g, J); }

  /// Largest component gap between the Christoffel and Gauss-equation curvatures.
  double gauss_route_gap() const { return gauss_R ? max_abs_difference(R, *gauss_R) : 0.0; }
};

namespace detail {

inline void check_interior(const Chart& chart, const Vector& u, double margin) {
  if (u.size() != chart.dim) throw Error(ErrorCode::DimensionMismatch, "point does not match chart dimension");
  for (int k = 0; k < chart.dim; ++k)
    if (u(k) - chart.lower(k) < margin || chart.upper(k) - u(k) < margin)
      throw Error(ErrorCode::OutOfDomain, "point is within the stencil margin of the chart boundary");
}

/// II_ab = <d_a d_b p, p> for the unit sphere; R_abcd = II_bc II_ad - II_ac II_bd.
inline FourTensor gauss_curvature(const SphereEmbedding& emb, const Vector& u) {
  using D1 = Dual<double>;
  using D2 = Dual<D1>;
  Matrix second(6, 6);
  const Vector p = emb.embed(u);
  for (int a = 0; a < 6; ++a)
    for (int b = a; b < 6; ++b) {
      std::vector<D2> x(6);
      for (int k = 0; k < 6; ++k)
        x[k] = D2(D1(u(k), k == a ? 1.0 : 0.0), D1(k == b ? 1.0 : 0.0, 0.0));
      const auto w = emb.embed(x);
      double s = 0.0;
      for (int i = 0; i < 7; ++i) s += w[i].d.d * p(i);
      second(a, b) = second(b, a) = s;
    }
  return FourTensor::from_components(6, [&](int i, int j, int k, int l) {
    return second(j, k) * second(i, l) - second(i, k) * second(j, l);
  });
}

}  // namespace detail

namespace detail {

/// Curvature quantities at a point together with their coordinate partials.
struct CurvatureState {
  std::vector<double> g, J, dJ;
  LocalCurvature<double> lc;
  std::vector<FourTensor> dR;
  std::vector<Matrix> dS, dS_star;
  Vector dtau, dtau_star;
};

/// Exact route: differentiate the curvature algebra along each coordinate by
/// lifting the third-order jet to dual numbers.
inline CurvatureState analytic_state(const Chart& chart, const Vector& u) {
  const MetricJet mj = chart.analytic_metric_jet(u);
  const StructureJet sj = chart.analytic_structure_jet(u);
  const int d = chart.dim;
  const std::size_t D = static_cast<std::size_t>(d);
  const std::size_t dd = D * D;
  CurvatureState st;
  st.g = mj.g;
  st.J = sj.J;
  st.dJ = sj.dJ;
  st.lc = local_curvature(LocalJet<double>{d, mj.g, mj.dg, mj.d2g, sj.J});
  st.dR.assign(D, FourTensor(d));
  st.dS.resize(D);
  st.dS_star.resize(D);
  st.dtau = Vector(d);
  st.dtau_star = Vector(d);
  using D1 = Dual<double>;
  for (std::size_t m = 0; m < D; ++m) {
    LocalJet<D1> lifted;
    lifted.d = d;
    lifted.g.resize(dd);
    lifted.dg.resize(dd * D);
    lifted.d2g.resize(dd * D * D);
    lifted.J.resize(dd);
    for (std::size_t e = 0; e < dd; ++e) {
      lifted.g[e] = D1(mj.g[e], mj.dg[m * dd + e]);
      lifted.J[e] = D1(sj.J[e], sj.dJ[m * dd + e]);
    }
    for (std::size_t e = 0; e < dd * D; ++e) lifted.dg[e] = D1(mj.dg[e], mj.d2g[m * dd * D + e]);
    for (std::size_t e = 0; e < dd * D * D; ++e) lifted.d2g[e] = D1(mj.d2g[e], mj.d3g[m * dd * D * D + e]);
    const auto dl = local_curvature(lifted);
    for (std::size_t e = 0; e < st.dR[m].data().size(); ++e) st.dR[m].data()[e] = dl.R[e].d;
    st.dS[m] = Matrix(d, d);
    st.dS_star[m] = Matrix(d, d);
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k) {
        st.dS[m](j, k) = dl.S[j * D + k].d;
        st.dS_star[m](j, k) = dl.S_star[j * D + k].d;
      }
    st.dtau(static_cast<Eigen::Index>(m)) = dl.tau.d;
    st.dtau_star(static_cast<Eigen::Index>(m)) = dl.tau_star.d;
  }
  return st;
}

/// Central difference of a vector-valued field along coordinate m, with one
/// optional Richardson step.
inline std::vector<double> fd_field(const std::function<std::vector<double>(const Vector&)>& f, const Vector& u,
                                    int m, double h, bool richardson) {
  auto central = [&](double step) {
    Vector plus = u, minus = u;
    plus(m) += step;
    minus(m) -= step;
    std::vector<double> a = f(plus);
    const std::vector<double> b = f(minus);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] - b[i]) / (2.0 * step);
    return a;
  };
  std::vector<double> coarse = central(h);
  if (!richardson) return coarse;
  const std::vector<double> fine = central(0.5 * h);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return coarse;
}

/// Finite-difference route: every derivative level differences the field of
/// the level below (Christoffels from g, their partials from Christoffels,
/// curvature partials from curvature), so truncation error reaches the
/// differential identities instead of cancelling inside an exact algebra.
inline CurvatureState finite_difference_state(const Chart& chart, const Vector& u, const FiniteDifferenceOptions& fd) {
  const int d = chart.dim;
  const std::size_t D = static_cast<std::size_t>(d);
  const std::size_t dd = D * D;
  auto flat = [](const Matrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return out;
  };
  auto metric_flat = [&](const Vector& v) { return flat(chart.metric(v)); };
  auto j_flat = [&](const Vector& v) { return flat(chart.complex_structure(v)); };

  auto connection_at = [&](const Vector& v) {
    LocalJet<double> jet{d, metric_flat(v), std::vector<double>(dd * D), std::vector<double>(dd * D * D, 0.0), {}};
    for (int m = 0; m < d; ++m) {
      const auto dg = fd_field(metric_flat, v, m, fd.step, fd.richardson);
      std::copy(dg.begin(), dg.end(), jet.dg.begin() + static_cast<std::ptrdiff_t>(m * dd));
    }
    return std::pair{jet.g, connection_from_jet(jet)};
  };
  auto gamma_field = [&](const Vector& v) { return connection_at(v).second.gamma; };
  auto curvature_at = [&](const Vector& v) {
    auto [g, conn] = connection_at(v);
    for (int m = 0; m < d; ++m) {
      const auto dgam = fd_field(gamma_field, v, m, fd.high_order_step, fd.richardson);
      std::copy(dgam.begin(), dgam.end(), conn.dgamma.begin() + static_cast<std::ptrdiff_t>(m * D * dd));
    }
    return curvature_from_connection(d, g, conn, j_flat(v));
  };
  auto pack = [](const LocalCurvature<double>& lc) {
    std::vector<double> out = lc.R;
    out.insert(out.end(), lc.S.begin(), lc.S.end());
    out.insert(out.end(), lc.S_star.begin(), lc.S_star.end());
    out.push_back(lc.tau);
    out.push_back(lc.tau_star);
    return out;
  };

  CurvatureState st;
  st.g = metric_flat(u);
  st.J = j_flat(u);
  st.dJ.resize(dd * D);
  for (int m = 0; m < d; ++m) {
    const auto dj = fd_field(j_flat, u, m, fd.step, fd.richardson);
    std::copy(dj.begin(), dj.end(), st.dJ.begin() + static_cast<std::ptrdiff_t>(m * dd));
  }
  st.lc = curvature_at(u);
  st.dR.assign(D, FourTensor(d));
  st.dS.resize(D);
  st.dS_star.resize(D);
  st.dtau = Vector(d);
  st.dtau_star = Vector(d);
  const std::size_t d4 = dd * dd;
  for (int m = 0; m < d; ++m) {
    const auto dv = fd_field([&](const Vector& v) { return pack(curvature_at(v)); }, u, m, fd.high_order_step,
                             fd.richardson);
    std::copy(dv.begin(), dv.begin() + static_cast<std::ptrdiff_t>(d4), st.dR[m].data().begin());
    st.dS[m] = Matrix(d, d);
    st.dS_star[m] = Matrix(d, d);
    for (std::size_t j = 0; j < D; ++j)
      for (std::size_t k = 0; k < D; ++k) {
        st.dS[m](j, k) = dv[d4 + j * D + k];
        st.dS_star[m](j, k) = dv[d4 + dd + j * D + k];
      }
    st.dtau(m) = dv[d4 + 2 * dd];
    st.dtau_star(m) = dv[d4 + 2 * dd + 1];
  }
  return st;
}

}  // namespace detail

inline ChartGeometry geometry_at(const Chart& chart, const Vector& u, const GeometryOptions& opt = {}) {
  const int d = chart.dim;
  const std::size_t D = static_cast<std::size_t>(d);
  bool analytic = false;
  switch (opt.mode) {
    case DerivativeMode::Auto: analytic = chart.has_analytic_derivatives(); break;
    case DerivativeMode::Analytic:
      if (!chart.has_analytic_derivatives())
        throw Error(ErrorCode::DerivativeUnavailable, "chart '" + chart.name + "' has no analytic derivatives");
      analytic = true;
      break;
    case DerivativeMode::FiniteDifference: analytic = false; break;
  }
  // Nested stencils reach one first-order step plus two higher-order steps.
  const double margin = analytic ? 2.0 * opt.fd.step
                                 : std::max(2.0 * opt.fd.step, opt.fd.step + 2.0 * opt.fd.high_order_step);
  detail::check_interior(chart, u, margin);

  Eigen::LLT<Matrix> llt(chart.metric(u));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidArgument, "metric is not positive definite at the sample point");

  const detail::CurvatureState st = analytic ? detail::analytic_state(chart, u)
                                             : detail::finite_difference_state(chart, u, opt.fd);
  const auto& lc = st.lc;
  const std::size_t dd = D * D;

  ChartGeometry out;
  out.point = u;
  out.analytic = analytic;
  out.g = detail::to_matrix(st.g, d);
  out.J = detail::to_matrix(st.J, d);
  out.christoffels = lc.gamma;
  out.R = FourTensor(d);
  out.R.data() = lc.R;
  out.ricci.S = detail::to_matrix(lc.S, d);
  out.ricci.S_star = detail::to_matrix(lc.S_star, d);
  out.ricci.tau = lc.tau;
  out.ricci.tau_star = lc.tau_star;
  out.grad_tau = st.dtau;
  out.grad_tau_star = st.dtau_star;
  const auto& dR = st.dR;
  const auto& dS = st.dS;
  const auto& dS_star = st.dS_star;

  auto gamma = [&](int k, int i, int j) { return lc.gamma[(k * D + i) * D + j]; };
  out.nabla_R.assign(D, FourTensor(d));
  out.nabla_S.resize(D);
  out.nabla_S_star.resize(D);
  out.nabla_J.resize(D);
  for (int m = 0; m < d; ++m) {
    FourTensor& nr = out.nabla_R[m];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            double s = dR[m](i, j, k, l);
            for (int p = 0; p < d; ++p)
              s -= gamma(p, m, i) * out.R(p, j, k, l) + gamma(p, m, j) * out.R(i, p, k, l) +
                   gamma(p, m, k) * out.R(i, j, p, l) + gamma(p, m, l) * out.R(i, j, k, p);
            nr(i, j, k, l) = s;
          }
    auto covariant_form = [&](const Matrix& partial, const Matrix& form) {
      Matrix res = partial;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int p = 0; p < d; ++p) res(j, k) -= gamma(p, m, j) * form(p, k) + gamma(p, m, k) * form(j, p);
      return res;
    };
    out.nabla_S[m] = covariant_form(dS[m], out.ricci.S);
    out.nabla_S_star[m] = covariant_form(dS_star[m], out.ricci.S_star);
    Matrix nj(d, d);
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) {
        double s = st.dJ[m * dd + k * D + j];
        for (int p = 0; p < d; ++p) s += gamma(k, m, p) * out.J(p, j) - out.J(k, p) * gamma(p, m, j);
        nj(k, j) = s;
      }
    out.nabla_J[m] = nj;
  }

  if (chart.kind == ChartKind::EmbeddedSphere && chart.sphere) out.gauss_R = detail::gauss_curvature(*chart.sphere, u);
  return out;
}

struct RicciIdentityDefects {
  double eq1_defect = 0.0;
  double eq2_defect = 0.0;
};

namespace detail {

/// Contracted second Bianchi identities on the coordinate basis:
///   sum_i (nabla_{E_i} R)(X,Y,Z,E_i) = (nabla_X S)(Y,Z) - (nabla_Y S)(X,Z)
///   sum_i (nabla_{E_i} S)(X,E_i) = X tau / 2
inline RicciIdentityDefects ricci_identities(const ChartGeometry& geo) {
  const int d = geo.dim();
  const Matrix ginv = geo.g.inverse();
  RicciIdentityDefects out;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) {
        double lhs = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) lhs += ginv(a, b) * geo.nabla_R[a](x, y, z, b);
        const double rhs = geo.nabla_S[x](y, z) - geo.nabla_S[y](x, z);
        out.eq1_defect = std::max(out.eq1_defect, std::abs(lhs - rhs));
      }
  for (int x = 0; x < d; ++x) {
    double lhs = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) lhs += ginv(a, b) * geo.nabla_S[a](x, b);
    out.eq2_defect = std::max(out.eq2_defect, std::abs(lhs - 0.5 * geo.grad_tau(x)));
  }
  return out;
}

}  // namespace detail

inline RicciIdentityDefects grad_ricci_identities(const Chart& chart, const Vector& u,
                                                  const GeometryOptions& opt = {}) {
  return detail::ricci_identities(geometry_at(chart, u, opt));
}

struct NearlyKahlerDefect {
  double nk = 0.0;      // max |(nabla_X J) X|
  double kahler = 0.0;  // max |(nabla_X J) Y|
  double skew = 0.0;    // max |(nabla_X J) Y + (nabla_Y J) X|
};

namespace detail {

inline NearlyKahlerDefect nk_from_operator(int d, const std::function<Vector(const Vector&, const Vector&)>& nabla_j,
                                           const std::function<double(const Vector&)>& norm, const Matrix& frame) {
  NearlyKahlerDefect out;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Vector x = frame.col(a), y = frame.col(b);
      const Vector xy = nabla_j(x, y);
      out.kahler = std::max(out.kahler, norm(xy));
      out.skew = std::max(out.skew, norm(xy + nabla_j(y, x)));
      if (a == b) out.nk = std::max(out.nk, norm(xy));
    }
  return out;
}

/// Ambient route on S^6: differentiate q -> q × Y~(q) along the great circle
/// through q in direction X (Y~ = tangential projection of Y), then project.
inline Vector sphere_nabla_j(const Vector& q, const Vector& x, const Vector& y) {
  using D1 = Dual<double>;
  std::vector<D1> w(7);
  D1 norm2 = D1(0.0);
  for (int i = 0; i < 7; ++i) {
    w[i] = D1(q(i), x(i));
    norm2 = norm2 + w[i] * w[i];
  }
  const D1 inv = D1(1.0) / sqrt(norm2);
  std::vector<D1> curve(7), ytan(7);
  D1 dot = D1(0.0);
  for (int i = 0; i < 7; ++i) {
    curve[i] = w[i] * inv;
    dot = dot + curve[i] * y(i);
  }
  for (int i = 0; i < 7; ++i) ytan[i] = D1(y(i)) - dot * curve[i];
  const std::vector<D1> jy = cross7(curve, ytan);
  Vector d_jy(7), d_y(7);
  for (int i = 0; i < 7; ++i) {
    d_jy(i) = jy[i].d;
    d_y(i) = ytan[i].d;
  }
  auto project = [&](const Vector& v) -> Vector { return v - q.dot(v) * q; };
  return project(d_jy) - cross7(q, Vector(project(d_y)));
}

}  // namespace detail

/// Nearly Kähler and Kähler defects over a g-orthonormal frame. Embedded
/// charts use the ambient derivative; parametric charts use Christoffels.
inline NearlyKahlerDefect nearly_kahler_defect(const Chart& chart, const Vector& u, const GeometryOptions& opt = {}) {
  if (chart.kind == ChartKind::EmbeddedSphere && chart.sphere) {
    detail::check_interior(chart, u, 0.0);
    const SphereEmbedding& emb = *chart.sphere;
    const Vector q = emb.embed(u);
    const Matrix tangent = emb.tangent_basis(u);
    const Matrix frame = orthonormal_frame(chart.point_structure(u));
    const Matrix ambient_frame = tangent * frame;
    return detail::nk_from_operator(
        6, [&](const Vector& x, const Vector& y) { return detail::sphere_nabla_j(q, x, y); },
        [](const Vector& v) { return v.norm(); }, ambient_frame);
  }
  const ChartGeometry geo = geometry_at(chart, u, opt);
  const int d = geo.dim();
  const Matrix frame = orthonormal_frame(geo.structure());
  return detail::nk_from_operator(
      d,
      [&](const Vector& x, const Vector& y) {
        Vector out = Vector::Zero(d);
        for (int m = 0; m < d; ++m) out += x(m) * (geo.nabla_J[m] * y);
        return out;
      },
      [&](const Vector& v) { return std::sqrt(v.dot(geo.g * v)); }, frame);
}

/// Same defects through the Christoffel route, for any chart kind.
inline NearlyKahlerDefect nearly_kahler_defect_intrinsic(const ChartGeometry& geo) {
  const int d = geo.dim();
  const Matrix frame = orthonormal_frame(geo.structure());
  return detail::nk_from_operator(
      d,
      [&](const Vector& x, const Vector& y) {
        Vector out = Vector::Zero(d);
        for (int m = 0; m < d; ++m) out += x(m) * (geo.nabla_J[m] * y);
        return out;
      },
      [&](const Vector& v) { return std::sqrt(v.dot(geo.g * v)); }, frame);
}

struct IdentityReport {
  double eq1_defect = 0.0;
  double eq2_defect = 0.0;
  double eq3_defect = 0.0;
  double eq4_defect = 0.0;
  double eq5_defect = 0.0;
  double eq10_defect = 0.0;
  double eq11_defect = 0.0;
  double eq12_defect = 0.0;
  double nk_defect = 0.0;
  double kahler_defect = 0.0;
};

/// Identities valid on nearly Kähler charts, each as the max difference of
/// its two sides over coordinate basis arguments:
///   eq3:  sum_i (nabla_{E_i} S')(X,E_i) = X tau' / 2
///   eq4:  X(tau - tau') = 0
///   eq5:  2 (nabla_X (S-S'))(Y,Z) = (S-S')((nabla_X J)Y, JZ) + (S-S')(JY, (nabla_X J)Z)
///   eq10: 2 (nabla_X S)(Y,Z) = S((nabla_X J)Y, JZ) + S(JY, (nabla_X J)Z)
///   eq11: (nabla_X S)(Y,Z) + (nabla_{JX} S)(JY,Z) = 0
///   eq12: cyclic sum of (nabla_X S)(Y,Z) vanishes
inline IdentityReport identities_from_geometry(const ChartGeometry& geo) {
  const int d = geo.dim();
  IdentityReport out;
  const auto ricci = detail::ricci_identities(geo);
  out.eq1_defect = ricci.eq1_defect;
  out.eq2_defect = ricci.eq2_defect;
  const Matrix ginv = geo.g.inverse();
  const Matrix& J = geo.J;
  const Matrix diff = geo.ricci.S - geo.ricci.S_star;

  for (int x = 0; x < d; ++x) {
    double lhs = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) lhs += ginv(a, b) * geo.nabla_S_star[a](x, b);
    out.eq3_defect = std::max(out.eq3_defect, std::abs(lhs - 0.5 * geo.grad_tau_star(x)));
    out.eq4_defect = std::max(out.eq4_defect, std::abs(geo.grad_tau(x) - geo.grad_tau_star(x)));
  }

  // nabla along J d_x: sum_c J^c_x nabla_c
  std::vector<Matrix> nabla_s_jx(static_cast<std::size_t>(d), Matrix::Zero(d, d));
  for (int x = 0; x < d; ++x)
    for (int c = 0; c < d; ++c) nabla_s_jx[x] += J(c, x) * geo.nabla_S[c];

  for (int x = 0; x < d; ++x) {
    const Matrix& nj = geo.nabla_J[x];
    const Matrix nabla_diff = geo.nabla_S[x] - geo.nabla_S_star[x];
    // (S-S')((nabla_X J) e_y, J e_z) = (nj^T diff J)(y, z), and symmetrically.
    const Matrix rhs5 = nj.transpose() * diff * J + J.transpose() * diff * nj;
    const Matrix rhs10 = nj.transpose() * geo.ricci.S * J + J.transpose() * geo.ricci.S * nj;
    const Matrix lhs11 = geo.nabla_S[x] + J.transpose() * nabla_s_jx[x];
    out.eq5_defect = std::max(out.eq5_defect, (2.0 * nabla_diff - rhs5).cwiseAbs().maxCoeff());
    out.eq10_defect = std::max(out.eq10_defect, (2.0 * geo.nabla_S[x] - rhs10).cwiseAbs().maxCoeff());
    out.eq11_defect = std::max(out.eq11_defect, lhs11.cwiseAbs().maxCoeff());
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) {
        const double cyc = geo.nabla_S[x](y, z) + geo.nabla_S[y](z, x) + geo.nabla_S[z](x, y);
        out.eq12_defect = std::max(out.eq12_defect, std::abs(cyc));
      }
  }
  const NearlyKahlerDefect nk = nearly_kahler_defect_intrinsic(geo);
  out.nk_defect = nk.nk;
  out.kahler_defect = nk.kahler;
  return out;
}

inline IdentityReport nk_identities(const Chart& chart, const Vector& u, const GeometryOptions& opt = {}) {
  return identities_from_geometry(geometry_at(chart, u, opt));
}

struct SchurScan {
  std::vector<double> nu_values;
  double spread = 0.0;
  double mean = 0.0;
};

/// nu = ((2n+1) tau - 3 tau') / (8 n (n^2-1)) at each chart point.
inline SchurScan schur_scan(const Chart& chart, const std::vector<Vector>& points, const GeometryOptions& opt = {}) {
  if (chart.dim < 4) throw Error(ErrorCode::InvalidDimension, "the scan needs dimension >= 4");
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no points to scan");
  SchurScan out;
  for (const Vector& u : points) {
    const ChartGeometry geo = geometry_at(chart, u, opt);
    out.nu_values.push_back(nu_from_scalars(geo.ricci, chart.dim / 2));
  }
  const auto [lo, hi] = std::minmax_element(out.nu_values.begin(), out.nu_values.end());
  out.spread = *hi - *lo;
  double sum = 0.0;
  for (double v : out.nu_values) sum += v;
  out.mean = sum / static_cast<double>(out.nu_values.size());
  return out;
}

}  // namespace nkcurv
