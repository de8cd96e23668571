// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "nkcurv/nkcurv.hpp"

using namespace nkcurv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args) {
  const int status = std::system((std::string("\"") + NKVERIFY_PATH + "\" " + args).c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

struct ModelCase {
  std::string name;
  HermitianPoint point;
  FourTensor curvature;
  double nu;
};

std::vector<ModelCase> prop1_models() {
  CounterRng rng(2024, 0);
  const HermitianPoint s6 = s6_point(rng.unit_vector(7), 2024);
  const HermitianPoint p = make_standard_point(3);
  return {{"S6", s6, s6_curvature(s6), 1.0},
          {"CP3(4)", p, kahler_space_form(p, 4.0), 1.0},
          {"CD3(-4)", p, kahler_space_form(p, -4.0), -1.0}};
}

ProductSpec product_of(double c1, int n1, double c2, int n2) {
  const HermitianPoint a = make_standard_point(n1);
  const HermitianPoint b = make_standard_point(n2);
  return product_curvature({{a, kahler_space_form(a, c1)}, {b, kahler_space_form(b, c2)}});
}

Outcome criterion1() {
  Outcome out;
  for (const ModelCase& m : prop1_models()) {
    const auto start = std::chrono::steady_clock::now();
    const Prop1Report rep = prop1_report(m.curvature, m.point, {}, 1);
    const double elapsed = seconds_since(start);
    out.require(rep.eq6_residual <= 1e-10, m.name + " eq6 " + fmt(rep.eq6_residual));
    out.require(rep.eq7_defect <= 1e-10, m.name + " eq7 " + fmt(rep.eq7_defect));
    out.require(rep.eq9_max_defect <= 1e-10, m.name + " eq9 " + fmt(rep.eq9_max_defect));
    out.require(std::abs(rep.nu_hat - m.nu) <= 1e-12, m.name + " nu_hat " + fmt(rep.nu_hat));
    out.require(elapsed < 1.0, m.name + " took " + fmt(elapsed) + " s");
  }
  return out;
}

Outcome criterion2() {
  Outcome out;
  for (const ModelCase& m : prop1_models()) {
    const Prop1Report rep = prop1_report(m.curvature, m.point, {500, 50}, 7);
    out.require(std::abs(rep.nu_hat - rep.nu_min) <= 1e-8, m.name + " |nu_hat-nu_min| " + fmt(rep.nu_hat - rep.nu_min));
    out.require(std::abs(rep.nu_hat - rep.nu_max) <= 1e-8, m.name + " |nu_hat-nu_max| " + fmt(rep.nu_hat - rep.nu_max));
  }
  return out;
}

Outcome criterion3() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  for (int n : {2, 3}) {
    const LemmaKernelReport rep = lemma_kernel(make_standard_point(n));
    const std::string tag = "dim " + std::to_string(2 * n);
    out.require(rep.space_dimension > 0, tag + " empty tensor space");
    out.require(rep.kernel_dimension == 0, tag + " kernel " + std::to_string(rep.kernel_dimension));
    out.require(rep.smallest_singular_value >= 1e-8 * rep.largest_singular_value,
                tag + " singular ratio " + fmt(rep.smallest_singular_value / rep.largest_singular_value));
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 30.0, "took " + fmt(elapsed) + " s");
  return out;
}

Outcome criterion4() {
  Outcome out;
  GeometryOptions plain;
  plain.mode = DerivativeMode::FiniteDifference;
  plain.fd.richardson = false;
  GeometryOptions halved = plain;
  halved.fd.step /= 2.0;
  halved.fd.high_order_step /= 2.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Chart chart = polynomial_chart(4, 100 + seed);
    const Vector u = sample_chart_points(chart, 1, seed)[0];
    const std::string tag = "seed " + std::to_string(100 + seed);
    const RicciIdentityDefects exact = grad_ricci_identities(chart, u);
    out.require(exact.eq1_defect <= 1e-6, tag + " analytic eq1 " + fmt(exact.eq1_defect));
    out.require(exact.eq2_defect <= 1e-6, tag + " analytic eq2 " + fmt(exact.eq2_defect));
    const RicciIdentityDefects fd = grad_ricci_identities(chart, u, plain);
    const RicciIdentityDefects half = grad_ricci_identities(chart, u, halved);
    out.require(fd.eq1_defect <= 1e-3, tag + " fd eq1 " + fmt(fd.eq1_defect));
    out.require(fd.eq2_defect <= 1e-3, tag + " fd eq2 " + fmt(fd.eq2_defect));
    out.require(fd.eq1_defect >= 3.0 * half.eq1_defect, tag + " eq1 ratio " + fmt(fd.eq1_defect / half.eq1_defect));
    out.require(fd.eq2_defect >= 3.0 * half.eq2_defect, tag + " eq2 ratio " + fmt(fd.eq2_defect / half.eq2_defect));
  }
  return out;
}

Outcome criterion5() {
  Outcome out;
  CounterRng rng(55, 0);
  const Chart chart = sphere_chart(rng.unit_vector(7), 55);
  const auto points = sample_chart_points(chart, 20, 55);
  double worst_nk = 0.0, least_kahler = INFINITY, worst_gauss = 0.0, worst_sectional = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const NearlyKahlerDefect nk = nearly_kahler_defect(chart, points[i]);
    worst_nk = std::max(worst_nk, nk.nk);
    least_kahler = std::min(least_kahler, nk.kahler);
    const ChartGeometry geo = geometry_at(chart, points[i]);
    worst_gauss = std::max(worst_gauss, geo.gauss_route_gap());
    const HermitianPoint p = geo.structure();
    const Matrix frame = orthonormal_frame(p);
    for (std::uint64_t s = 0; s < 10; ++s) {
      // Generic, antiholomorphic and holomorphic planes.
      CounterRng prng(i, s);
      const auto generic = orthonormalize({sample_unit_vector(p, prng, frame), sample_unit_vector(p, prng, frame)}, p);
      const TwoPlane anti = sample_antiholomorphic_plane(p, s, i);
      const Vector x = generic[0];
      const Vector jx = p.apply_J(x) / p.norm(p.apply_J(x));
      for (const TwoPlane& plane : {TwoPlane{generic[0], generic[1]}, anti, TwoPlane{x, jx}})
        worst_sectional = std::max(worst_sectional, std::abs(sectional(geo.R, p, plane) - 1.0));
    }
  }
  out.require(worst_nk <= 1e-5, "nk " + fmt(worst_nk));
  out.require(least_kahler >= 0.1, "kahler " + fmt(least_kahler));
  out.require(worst_gauss <= 1e-5, "gauss gap " + fmt(worst_gauss));
  out.require(worst_sectional <= 1e-5, "sectional " + fmt(worst_sectional));
  if (out.pass)
    out.detail = "nk<=" + fmt(worst_nk) + " kahler>=" + fmt(least_kahler) + " gauss<=" + fmt(worst_gauss);
  return out;
}

Outcome criterion6() {
  Outcome out;
  CounterRng rng(66, 0);
  const std::pair<std::string, Chart> charts[] = {{"S6", sphere_chart(rng.unit_vector(7), 66)},
                                                  {"FS c=4 n=3", complex_space_form_chart(3, 4.0)}};
  for (const auto& [name, chart] : charts) {
    const SchurScan scan = schur_scan(chart, sample_chart_points(chart, 10, 66));
    out.require(scan.spread <= 2e-4, name + " spread " + fmt(scan.spread));
    out.require(std::abs(scan.mean - 1.0) <= 1e-4, name + " mean " + fmt(scan.mean));
  }
  return out;
}

Outcome criterion7() {
  Outcome out;
  const SamplingBudget budget{};
  CounterRng rng(77, 0);
  const HermitianPoint s6 = s6_point(rng.unit_vector(7), 77);
  const HermitianPoint p6 = make_standard_point(3);
  const HermitianPoint p8 = make_standard_point(4);
  const ProductSpec prod = product_of(4.0, 1, 4.0, 2);
  struct Case {
    std::string name;
    FourTensor r;
    HermitianPoint p;
    ModelLabel expected;
  };
  const Case cases[] = {{"C4 (dim 8)", FourTensor(8), p8, ModelLabel::Cn},
                        {"CP4(4) (dim 8)", kahler_space_form(p8, 4.0), p8, ModelLabel::CPn},
                        {"CD3(-4) (dim 6)", kahler_space_form(p6, -4.0), p6, ModelLabel::CDn},
                        {"S6", s6_curvature(s6), s6, ModelLabel::S6},
                        {"CP1(4)xCP2(4)", prod.curvature, prod.combined, ModelLabel::NonConstant}};
  int correct = 0;
  for (const Case& c : cases) {
    const ClassLabel label = classify(c.r, c.p, budget, 1);
    if (label.label == c.expected)
      ++correct;
    else
      out.require(false, c.name + " -> " + to_string(label.label));
  }
  // Exhaustive check of the product's range: a brute-force sweep never goes
  // below zero, a mixed plane attains zero, and positive values occur.
  double lo = INFINITY, hi = -INFINITY;
  for (int s = 0; s < 20000; ++s) {
    const TwoPlane a = sample_antiholomorphic_plane(prod.combined, 5000 + s);
    const double k = prod.curvature(a.x, a.y, a.y, a.x);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  const Vector e1 = Vector::Unit(6, 0), e3 = Vector::Unit(6, 2);
  out.require(lo >= -1e-12, "sampled minimum " + fmt(lo));
  out.require(prod.curvature(e1, e3, e3, e1) == 0.0, "mixed plane not flat");
  out.require(hi > 0.0, "sampled maximum " + fmt(hi));
  // The refined range, at the budget used in criterion 2.
  const ClassLabel mixed = classify(prod.curvature, prod.combined, {500, 50}, 1);
  out.require(std::abs(mixed.nu_min) <= 1e-8, "nu_min " + fmt(mixed.nu_min));
  out.require(mixed.nu_max > 0.0, "nu_max " + fmt(mixed.nu_max));
  if (out.pass) out.detail = std::to_string(correct) + "/5 labels correct";
  return out;
}

Outcome criterion8() {
  Outcome out;
  const Vector x = Vector::Unit(4, 0), y = Vector::Unit(4, 2);
  const double opposite = eq13_value(product_of(4.0, 1, -4.0, 1), x, y);
  const double same = eq13_value(product_of(4.0, 1, 4.0, 1), x, y);
  out.require(std::abs(opposite) <= 1e-10, "opposite factors " + fmt(opposite));
  out.require(std::abs(same - 8.0) <= 1e-10, "CP1(4)xCP1(4) " + fmt(same));
  return out;
}

Outcome criterion9() {
  Outcome out;
  const fs::path source = NKCURV_SOURCE_DIR;
  const fs::path dir = fs::temp_directory_path() / "nkcurv_acceptance";
  fs::create_directories(dir);
  const std::string config = (source / "scenarios" / "s6.cfg").string();
  const fs::path report = dir / "s6.report";

  std::string runs[2], json[2];
  for (int i = 0; i < 2; ++i) {
    fs::remove(report);
    const int code = run_tool("verify --config \"" + config + "\" --out \"" + report.string() + "\"");
    out.require(code == 0, "verify exit " + std::to_string(code));
    runs[i] = read_file(report);
    json[i] = read_file(report.string() + ".json");
  }
  out.require(!runs[0].empty(), "no report written");
  out.require(runs[0] == runs[1], "reports differ between runs");
  out.require(json[0] == json[1], "JSON mirrors differ between runs");

  const fs::path captured = dir / "stdout.report";
  run_tool("verify --config \"" + config + "\" > \"" + captured.string() + "\"");
  const std::string golden = read_file(source / "tests" / "data" / "s6.report");
  out.require(!golden.empty(), "golden file missing");
  out.require(read_file(captured) == golden, "report differs from golden file");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 Curvature decomposition on the S6, CP3(4), CD3(-4) models", criterion1},
      {"2 Trace formula for nu matches measured antiholomorphic extremes", criterion2},
      {"3 Lemma: trivial kernel in dims 4 and 6", criterion3},
      {"4 Contracted Bianchi identities on random metrics", criterion4},
      {"5 Nearly Kaehler S6: nk, non-Kaehler, Gauss route, K = 1", criterion5},
      {"6 Schur scan on S6 and Fubini-Study", criterion6},
      {"7 Classification of model data", criterion7},
      {"8 Product curvature formula on mixed planes", criterion8},
      {"9 CLI determinism and golden report", criterion9},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(start);
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %s (%.2fs)%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), elapsed,
                o.detail.empty() ? "" : " -- ", o.detail.c_str());
  }
  std::printf("acceptance: %d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
