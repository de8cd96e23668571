#include <catch_amalgamated.hpp>

#include <cmath>

#include "nkcurv/chart.hpp"
#include "nkcurv/dual.hpp"

using namespace nkcurv;
using Catch::Matchers::WithinAbs;

namespace {

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Closed-form Fubini-Study (c > 0) / Bergman (c < 0) metric in the usual
// inhomogeneous coordinates.
Matrix space_form_metric(int n, double c, const Vector& u) {
  const double s = c / 4.0;
  const double r = 1.0 + s * u.squaredNorm();
  const Vector ju = standard_complex_structure(n) * u;
  return Matrix::Identity(2 * n, 2 * n) / r - (s / (r * r)) * (u * u.transpose() + ju * ju.transpose());
}

}  // namespace

TEST_CASE("nested duals give exact higher derivatives", "[dual]") {
  using D3 = Dual<Dual<Dual<double>>>;
  const double x0 = 0.37;
  D3 x;
  x.v.v = Dual<double>(x0, 1.0);
  x.v.d = Dual<double>(1.0, 0.0);
  x.d.v = Dual<double>(1.0, 0.0);
  // f = sin(x) exp(x) / (1 + x^2) + sqrt(log(2 + x)) - cos(x)
  auto f = [](auto t) { return sin(t) * exp(t) / (1.0 + t * t) + sqrt(log(2.0 + t)) - cos(t); };
  const D3 y = f(x);
  CHECK_THAT(y.v.v.v, WithinAbs(f(x0), 1e-15));

  // Central-difference oracle of increasing order on the plain function.
  const double h = 1e-3;
  auto fd1 = [&](double t) { return (f(t + h) - f(t - h)) / (2 * h); };
  auto fd2 = [&](double t) { return (f(t + h) - 2 * f(t) + f(t - h)) / (h * h); };
  auto fd3 = [&](double t) {
    return (f(t + 2 * h) - 2 * f(t + h) + 2 * f(t - h) - f(t - 2 * h)) / (2 * h * h * h);
  };
  CHECK_THAT(y.v.v.d, WithinAbs(fd1(x0), 1e-6));
  CHECK_THAT(y.v.d.d, WithinAbs(fd2(x0), 1e-5));
  CHECK_THAT(y.d.d.d, WithinAbs(fd3(x0), 1e-4));
  // All mixed first derivatives agree.
  CHECK_THAT(y.v.v.d, WithinAbs(y.v.d.v, 1e-14));
  CHECK_THAT(y.v.d.v, WithinAbs(y.d.v.v, 1e-14));
  CHECK(primal(y) == y.v.v.v);
}

TEST_CASE("space form charts", "[chart]") {
  for (const auto& [n, c] : {std::pair{3, 4.0}, std::pair{2, -4.0}, std::pair{2, 1.0}}) {
    const Chart chart = complex_space_form_chart(n, c);
    REQUIRE(chart.has_analytic_derivatives());
    CHECK((chart.metric(Vector::Zero(2 * n)) - Matrix::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() == 0.0);
    for (const Vector& u : sample_chart_points(chart, 5, 3)) {
      CHECK((chart.metric(u) - space_form_metric(n, c, u)).cwiseAbs().maxCoeff() < 1e-14);
      const StructureDefects sd = structure_defects(chart.point_structure(u));
      CHECK(sd.j_square_defect < 1e-14);
      CHECK(sd.compat_defect < 1e-14);
    }
  }
}

TEST_CASE("analytic jets agree with finite differences", "[chart]") {
  const Chart charts[] = {complex_space_form_chart(2, 4.0), polynomial_chart(4, 7), sphere_chart(Vector::Ones(7), 2)};
  for (const Chart& chart : charts) {
    const Vector u = sample_chart_points(chart, 1, 11)[0];
    const MetricJet exact = chart.analytic_metric_jet(u);
    const MetricJet approx = fd_metric_jet(chart.metric, u, {});
    INFO(chart.name);
    CHECK(max_gap(exact.g, approx.g) < 1e-15);
    CHECK(max_gap(exact.dg, approx.dg) < 1e-8);
    CHECK(max_gap(exact.d2g, approx.d2g) < 1e-6);
    CHECK(max_gap(exact.d3g, approx.d3g) < 1e-4);
    const StructureJet sj = chart.analytic_structure_jet(u);
    const StructureJet sj_fd = fd_structure_jet(chart.complex_structure, u, {});
    CHECK(max_gap(sj.dJ, sj_fd.dJ) < 1e-8);
  }
}

TEST_CASE("plain central differences converge at second order", "[chart]") {
  // Fubini-Study is not polynomial, so no difference quotient is exact.
  const Chart chart = complex_space_form_chart(2, 4.0);
  const Vector u = Vector::Constant(4, 0.05);
  const MetricJet exact = chart.analytic_metric_jet(u);
  const MetricJet coarse = fd_metric_jet(chart.metric, u, {2e-2, 8e-2, false});
  const MetricJet fine = fd_metric_jet(chart.metric, u, {1e-2, 4e-2, false});
  // Halving h divides an O(h^2) error by about four.
  CHECK(max_gap(exact.dg, coarse.dg) / max_gap(exact.dg, fine.dg) > 3.0);
  CHECK(max_gap(exact.d2g, coarse.d2g) / max_gap(exact.d2g, fine.d2g) > 3.0);
  CHECK(max_gap(exact.d3g, coarse.d3g) / max_gap(exact.d3g, fine.d3g) > 3.0);
}

TEST_CASE("polynomial charts are deterministic and Hermitian", "[chart]") {
  const Chart a = polynomial_chart(6, 42);
  const Chart b = polynomial_chart(6, 42);
  const Chart other = polynomial_chart(6, 43);
  const Vector u = Vector::Constant(6, 0.1);
  CHECK(a.metric(u) == b.metric(u));
  CHECK(a.metric(u) != other.metric(u));
  const StructureDefects sd = structure_defects(a.point_structure(u));
  CHECK(sd.j_square_defect < 1e-13);
  CHECK(sd.compat_defect < 1e-13);
  CHECK(a.point_structure(u).is_positive_definite());
  const Chart fd_only = polynomial_chart(6, 42, 0.05, false);
  CHECK_FALSE(fd_only.has_analytic_derivatives());
  CHECK(fd_only.metric(u) == a.metric(u));
}

TEST_CASE("sphere chart", "[chart][s6]") {
  const Chart chart = sphere_chart(Vector::Unit(7, 6), 5);
  REQUIRE(chart.sphere.has_value());
  CHECK(chart.kind == ChartKind::EmbeddedSphere);
  CHECK((chart.metric(Vector::Zero(6)) - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
  for (const Vector& u : sample_chart_points(chart, 5, 1)) {
    const Vector p = chart.sphere->embed(u);
    CHECK_THAT(p.norm(), WithinAbs(1.0, 1e-15));
    // The chart metric is the pullback of the Euclidean metric.
    const Matrix t = chart.sphere->tangent_basis(u);
    CHECK((t.transpose() * t - chart.metric(u)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((p.transpose() * t).cwiseAbs().maxCoeff() < 1e-14);
    const StructureDefects sd = structure_defects(chart.point_structure(u));
    CHECK(sd.j_square_defect < 1e-13);
    CHECK(sd.compat_defect < 1e-13);
  }
}

TEST_CASE("product and user charts", "[chart]") {
  const Chart a = complex_space_form_chart(1, 4.0);
  const Chart b = complex_space_form_chart(2, 4.0);
  const Chart prod = product_chart(a, b);
  REQUIRE(prod.dim == 6);
  REQUIRE(prod.has_analytic_derivatives());
  const Vector u = sample_chart_points(prod, 1, 4)[0];
  const Matrix g = prod.metric(u);
  CHECK((g.block(0, 0, 2, 2) - a.metric(u.head(2))).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.block(2, 2, 4, 4) - b.metric(u.tail(4))).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.block(0, 2, 2, 4).cwiseAbs().maxCoeff() == 0.0);
  const MetricJet jet = prod.analytic_metric_jet(u);
  CHECK(max_gap(jet.d3g, fd_metric_jet(prod.metric, u, {}).d3g) < 1e-4);

  const Chart user = user_chart("flat", 4, Vector::Constant(4, -1.0), Vector::Constant(4, 1.0),
                                [](const Vector&) { return Matrix(Matrix::Identity(4, 4)); },
                                [](const Vector&) { return standard_complex_structure(2); });
  CHECK_FALSE(user.has_analytic_derivatives());
  CHECK_THROWS_AS(user_chart("odd", 3, Vector::Zero(3), Vector::Ones(3), user.metric, user.complex_structure),
                  Error);
}

TEST_CASE("chart sampling", "[chart]") {
  const Chart chart = complex_space_form_chart(2, -4.0);
  const auto pts = sample_chart_points(chart, 50, 9);
  const auto again = sample_chart_points(chart, 50, 9);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i] == again[i]);
    CHECK((pts[i].array() > chart.lower.array()).all());
    CHECK((pts[i].array() < chart.upper.array()).all());
    CHECK(chart.point_structure(pts[i]).is_positive_definite());
  }
}
