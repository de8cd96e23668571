#pragma once

// Scenario driver: a line-oriented config selects a model and a list of
// checks; the result is an ordered, byte-reproducible report.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nkcurv/chart.hpp"
#include "nkcurv/chart_geometry.hpp"
#include "nkcurv/constructors.hpp"
#include "nkcurv/error.hpp"
#include "nkcurv/hermitian.hpp"
#include "nkcurv/invariants.hpp"
#include "nkcurv/random.hpp"
#include "nkcurv/ricci.hpp"

namespace nkcurv {

inline constexpr const char* kToolkitName = "nkcurv";
inline constexpr const char* kToolkitVersion = "0.1.0";

/// Fixed execution order of the check groups.
inline const std::vector<std::string>& check_groups() {
  static const std::vector<std::string> groups = {"structure", "symmetry", "lemma",    "prop1",
                                                  "identities", "nk",      "schur", "classify"};
  return groups;
}

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"cn", "cpn", "cdn", "s6", "product", "custom-chart"};
  return names;
}

struct ScenarioConfig {
  std::string model = "s6";
  int n = 3;
  double c = 4.0;
  double tol_structural = kStructuralTolerance;
  double tol_chart = kChartTolerance;
  int samples = 200;
  int refine_steps = 20;
  std::uint64_t seed = 1;
  std::vector<std::string> checks = check_groups();
  std::string report_path;

  bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

/// Shortest decimal that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw Error(ErrorCode::Configuration, "invalid value for '" + key + "': '" + text + "'");
  return value;
}

}  // namespace detail

/// Checks the documented invariants; every violation is a Configuration error.
inline void validate(const ScenarioConfig& cfg) {
  const auto& models = model_names();
  if (std::find(models.begin(), models.end(), cfg.model) == models.end())
    throw Error(ErrorCode::Configuration, "unknown model '" + cfg.model + "'");
  if (cfg.n < 1) throw Error(ErrorCode::Configuration, "n must be at least 1");
  if (!(cfg.tol_structural > 0.0) || !(cfg.tol_chart > 0.0))
    throw Error(ErrorCode::Configuration, "tolerances must be positive");
  if (cfg.samples < 1) throw Error(ErrorCode::Configuration, "samples must be at least 1");
  if (cfg.refine_steps < 0) throw Error(ErrorCode::Configuration, "refine_steps must be non-negative");
  if (!std::isfinite(cfg.c)) throw Error(ErrorCode::Configuration, "c must be finite");
  const auto& groups = check_groups();
  for (const auto& check : cfg.checks)
    if (std::find(groups.begin(), groups.end(), check) == groups.end())
      throw Error(ErrorCode::Configuration, "unknown check '" + check + "'");
  if (cfg.model == "cpn" && !(cfg.c > 0.0)) throw Error(ErrorCode::Configuration, "cpn needs c > 0");
  if (cfg.model == "cdn" && !(cfg.c < 0.0)) throw Error(ErrorCode::Configuration, "cdn needs c < 0");
  if (cfg.model == "product" && cfg.c == 0.0) throw Error(ErrorCode::Configuration, "product needs c != 0");
  if (cfg.model == "product" && cfg.n < 2) throw Error(ErrorCode::Configuration, "product needs n >= 2");
  if (cfg.model == "s6" && cfg.n != 3) throw Error(ErrorCode::Configuration, "s6 needs n = 3");
  const bool wants_classify = std::find(cfg.checks.begin(), cfg.checks.end(), "classify") != cfg.checks.end();
  if (wants_classify && cfg.n < 2) throw Error(ErrorCode::Configuration, "classify needs n >= 2");
}

inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Configuration, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (seen.count(key))
      throw Error(ErrorCode::Configuration, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen[key] = line_no;

    if (key == "model") {
      cfg.model = value;
    } else if (key == "n") {
      cfg.n = detail::parse_number<int>(key, value);
    } else if (key == "c") {
      cfg.c = detail::parse_number<double>(key, value);
    } else if (key == "tol_structural") {
      cfg.tol_structural = detail::parse_number<double>(key, value);
    } else if (key == "tol_chart") {
      cfg.tol_chart = detail::parse_number<double>(key, value);
    } else if (key == "samples") {
      cfg.samples = detail::parse_number<int>(key, value);
    } else if (key == "refine_steps") {
      cfg.refine_steps = detail::parse_number<int>(key, value);
    } else if (key == "seed") {
      cfg.seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "checks") {
      std::vector<std::string> requested;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) throw Error(ErrorCode::Configuration, "empty entry in 'checks'");
        requested.push_back(item);
      }
      if (requested.empty()) throw Error(ErrorCode::Configuration, "'checks' must not be empty");
      // Canonical order, duplicates folded.
      cfg.checks.clear();
      for (const auto& group : check_groups())
        if (std::find(requested.begin(), requested.end(), group) != requested.end()) cfg.checks.push_back(group);
      for (const auto& r : requested)
        if (std::find(check_groups().begin(), check_groups().end(), r) == check_groups().end())
          throw Error(ErrorCode::Configuration, "unknown check '" + r + "'");
    } else if (key == "report_path") {
      cfg.report_path = value;
    } else {
      throw Error(ErrorCode::Configuration, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

inline ScenarioConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Configuration, "cannot read config '" + path + "'");
  return parse_config(in);
}

/// Ordered key/value pairs; also the body of the config file format.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& cfg) {
  std::string checks;
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) checks += (i ? "," : "") + cfg.checks[i];
  return {{"model", cfg.model},
          {"n", std::to_string(cfg.n)},
          {"c", detail::shortest(cfg.c)},
          {"tol_structural", detail::shortest(cfg.tol_structural)},
          {"tol_chart", detail::shortest(cfg.tol_chart)},
          {"samples", std::to_string(cfg.samples)},
          {"refine_steps", std::to_string(cfg.refine_steps)},
          {"seed", std::to_string(cfg.seed)},
          {"checks", checks},
          {"report_path", cfg.report_path}};
}

inline std::string format_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : config_entries(cfg)) out += key + " = " + value + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Models

struct ModelInstance {
  std::string name;
  HermitianPoint point;
  FourTensor curvature;
  Chart chart;
  /// Chart coordinate where chart checks and chart-derived pointwise data live.
  Vector chart_point;
  /// True when `curvature` is closed-form rather than numerically derived.
  bool exact = true;
  ModelLabel expected = ModelLabel::Indeterminate;
};

inline ModelInstance build_model(const ScenarioConfig& cfg) {
  validate(cfg);
  const int n = cfg.n;
  ModelInstance m{cfg.model, make_standard_point(n), FourTensor(2 * n), flat_chart(n), Vector(), true,
                  ModelLabel::Indeterminate};
  auto chart_sample = [&](const Chart& chart) { return sample_chart_points(chart, 1, cfg.seed)[0]; };

  if (cfg.model == "cn") {
    m.expected = ModelLabel::Cn;
  } else if (cfg.model == "cpn" || cfg.model == "cdn") {
    m.curvature = kahler_space_form(m.point, cfg.c);
    m.chart = complex_space_form_chart(n, cfg.c);
    m.expected = cfg.c > 0.0 ? ModelLabel::CPn : ModelLabel::CDn;
  } else if (cfg.model == "s6") {
    CounterRng rng(cfg.seed, 0x5600);
    const Vector base = rng.unit_vector(7);
    m.point = s6_point(base, cfg.seed);
    m.curvature = s6_curvature(m.point);
    m.chart = sphere_chart(base, cfg.seed);
    m.expected = ModelLabel::S6;
  } else if (cfg.model == "product") {
    const HermitianPoint a = make_standard_point(1);
    const HermitianPoint b = make_standard_point(n - 1);
    const ProductSpec spec = product_curvature({{a, kahler_space_form(a, cfg.c)}, {b, kahler_space_form(b, cfg.c)}});
    m.point = spec.combined;
    m.curvature = spec.curvature;
    m.chart = product_chart(complex_space_form_chart(1, cfg.c), complex_space_form_chart(n - 1, cfg.c));
    m.expected = ModelLabel::NonConstant;
  } else {  // custom-chart
    m.chart = polynomial_chart(2 * n, cfg.seed, 0.05, false);
    m.chart.name = "custom polynomial chart";
    m.exact = false;
    m.expected = ModelLabel::NonConstant;
  }
  m.chart_point = chart_sample(m.chart);
  if (!m.exact) {
    const ChartGeometry geo = geometry_at(m.chart, m.chart_point);
    m.point = geo.structure();
    m.curvature = geo.R;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports

struct CheckRecord {
  std::string id;
  bool pass = false;
  double defect = 0.0;
  double tolerance = 0.0;
  /// Diagnostic for checks that could not be evaluated (defect is then inf).
  std::string message;
};

struct Report {
  ScenarioConfig config;
  std::vector<CheckRecord> records;

  int pass_count() const {
    return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.pass; }));
  }
  int fail_count() const { return static_cast<int>(records.size()) - pass_count(); }
  bool all_pass() const { return fail_count() == 0; }
};

inline std::string format_defect(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_report(const Report& report) {
  std::string out = std::string("TOOLKIT ") + kToolkitName + " " + kToolkitVersion + "\n";
  for (const auto& [key, value] : config_entries(report.config)) out += "CONFIG " + key + " = " + value + "\n";
  for (const auto& r : report.records)
    out += "CHECK " + r.id + (r.pass ? " PASS" : " FAIL") + " defect=" + format_defect(r.defect) +
           " tol=" + detail::shortest(r.tolerance) + "\n";
  out += "SUMMARY pass=" + std::to_string(report.pass_count()) + " fail=" + std::to_string(report.fail_count()) +
         " seed=" + std::to_string(report.config.seed) + "\n";
  return out;
}

inline nlohmann::ordered_json report_json(const Report& report) {
  nlohmann::ordered_json j;
  j["toolkit"] = kToolkitName;
  j["version"] = kToolkitVersion;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config_entries(report.config)) cfg[key] = value;
  j["config"] = cfg;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& r : report.records) {
    nlohmann::ordered_json rec;
    rec["id"] = r.id;
    rec["status"] = r.pass ? "PASS" : "FAIL";
    rec["defect"] = format_defect(r.defect);
    rec["tolerance"] = detail::shortest(r.tolerance);
    if (!r.message.empty()) rec["message"] = r.message;
    checks.push_back(rec);
  }
  j["checks"] = checks;
  j["summary"] = {{"pass", report.pass_count()}, {"fail", report.fail_count()}, {"seed", report.config.seed}};
  return j;
}

/// Recovers the configuration from the CONFIG lines of a text report.
inline ScenarioConfig config_from_report(const std::string& text) {
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line))
    if (line.rfind("CONFIG ", 0) == 0) body += line.substr(7) + "\n";
  return parse_config(body);
}

/// Writes the text report and its JSON mirror at `<path>.json`.
inline void write_report(const Report& report, const std::string& path) {
  std::ofstream text(path, std::ios::binary);
  if (!text) throw Error(ErrorCode::Configuration, "cannot write report '" + path + "'");
  text << format_report(report);
  std::ofstream json(path + ".json", std::ios::binary);
  if (!json) throw Error(ErrorCode::Configuration, "cannot write report '" + path + ".json'");
  json << report_json(report).dump(2) << "\n";
  if (!text.good() || !json.good()) throw Error(ErrorCode::Configuration, "failed writing report '" + path + "'");
}

// ---------------------------------------------------------------------------
// Checks

namespace detail {

class Recorder {
 public:
  explicit Recorder(std::vector<CheckRecord>& out) : out_(out) {}

  void add(const std::string& id, double defect, double tol) {
    out_.push_back({id, defect <= tol, defect, tol, {}});
  }
  void fail(const std::string& id, double tol, const std::string& message) {
    out_.push_back({id, false, std::numeric_limits<double>::infinity(), tol, message});
  }
  /// Runs `body`; if it throws, every id it was expected to emit (and has
  /// not yet emitted) becomes a FAIL record carrying the diagnostic.
  void guarded(const std::vector<std::pair<std::string, double>>& ids, const std::function<void()>& body) {
    const std::size_t before = out_.size();
    try {
      body();
    } catch (const std::exception& e) {
      const std::size_t done = out_.size() - before;
      for (std::size_t i = done; i < ids.size(); ++i) fail(ids[i].first, ids[i].second, e.what());
    }
  }

 private:
  std::vector<CheckRecord>& out_;
};

}  // namespace detail

inline Report run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  Report report{cfg, {}};
  detail::Recorder rec(report.records);
  const ModelInstance model = build_model(cfg);
  const SamplingBudget budget{cfg.samples, cfg.refine_steps};
  const double ts = cfg.tol_structural;
  const double tc = cfg.tol_chart;
  // Chart-derived pointwise data carries discretisation error.
  const double tp = model.exact ? ts : tc;
  const HermitianPoint& p = model.point;
  const FourTensor& r = model.curvature;
  auto wants = [&](const char* group) {
    return std::find(cfg.checks.begin(), cfg.checks.end(), group) != cfg.checks.end();
  };

  if (wants("structure")) {
    rec.guarded({{"structure.j_square", ts}, {"structure.compat", ts}}, [&] {
      const StructureDefects sd = structure_defects(p);
      rec.add("structure.j_square", sd.j_square_defect, ts);
      rec.add("structure.compat", sd.compat_defect, ts);
    });
  }

  if (wants("symmetry")) {
    rec.guarded({{"symmetry.c1", tp}, {"symmetry.c2", tp}, {"symmetry.c3", tp}, {"symmetry.c4", tp}}, [&] {
      const SymmetryDefects sd = symmetry_defects(r, p);
      rec.add("symmetry.c1", sd.c1, tp);
      rec.add("symmetry.c2", sd.c2, tp);
      rec.add("symmetry.c3", sd.c3, tp);
      rec.add("symmetry.c4", sd.c4, tp);
    });
  }

  if (wants("lemma")) {
    // The lemma applied to the difference between R and its reconstruction.
    rec.guarded({{"lemma.hypotheses", tp}, {"lemma.condition5", tp}, {"lemma.tensor_norm", tp}}, [&] {
      const RicciData ricci = contractions(r, p);
      const Matrix s = 0.5 * (ricci.S + ricci.S.transpose());
      const FourTensor t = r - reconstruct_R(s, nu_from_scalars(ricci, p.n()), p, std::max(tp, 1e-6));
      rec.add("lemma.hypotheses", symmetry_defects(t, p).max(), tp);
      const LemmaDefect ld = lemma_defect(t, p, cfg.samples, cfg.seed, tp);
      rec.add("lemma.condition5", ld.condition5_defect, tp);
      rec.add("lemma.tensor_norm", ld.tensor_norm, tp);
    });
  }

  if (wants("prop1")) {
    rec.guarded({{"prop1.eq6", tp},
                 {"prop1.eq7", tp},
                 {"prop1.eq9", tp},
                 {"prop1.nu_range", tp},
                 {"prop1.rk", tp},
                 {"prop1.bianchi", tp}},
                [&] {
                  const Prop1Report pr = prop1_report(r, p, budget, cfg.seed);
                  rec.add("prop1.eq6", pr.eq6_residual, tp);
                  rec.add("prop1.eq7", pr.eq7_defect, tp);
                  rec.add("prop1.eq9", pr.eq9_max_defect, tp);
                  rec.add("prop1.nu_range", std::max(std::abs(pr.nu_hat - pr.nu_min), std::abs(pr.nu_hat - pr.nu_max)),
                          tp);
                  rec.add("prop1.rk", pr.rk_defect, tp);
                  rec.add("prop1.bianchi", pr.bianchi_defect, tp);
                });
  }

  if (wants("identities")) {
    const std::vector<std::string> ids = {"eq1", "eq2", "eq3", "eq4", "eq5", "eq10", "eq11", "eq12"};
    std::vector<std::pair<std::string, double>> expected;
    for (const auto& id : ids) expected.emplace_back("identities." + id, tc);
    rec.guarded(expected, [&] {
      const IdentityReport ir = nk_identities(model.chart, model.chart_point);
      const double values[] = {ir.eq1_defect, ir.eq2_defect,  ir.eq3_defect,  ir.eq4_defect,
                               ir.eq5_defect, ir.eq10_defect, ir.eq11_defect, ir.eq12_defect};
      for (std::size_t i = 0; i < ids.size(); ++i) rec.add("identities." + ids[i], values[i], tc);
    });
  }

  if (wants("nk")) {
    rec.guarded({{"nk.nearly_kahler", tc}, {"nk.skew", tc}}, [&] {
      const NearlyKahlerDefect nk = nearly_kahler_defect(model.chart, model.chart_point);
      rec.add("nk.nearly_kahler", nk.nk, tc);
      rec.add("nk.skew", nk.skew, tc);
    });
  }

  if (wants("schur")) {
    rec.guarded({{"schur.spread", tc}}, [&] {
      const SchurScan scan = schur_scan(model.chart, sample_chart_points(model.chart, 10, cfg.seed ^ 0x5c4u));
      rec.add("schur.spread", scan.spread, tc);
    });
  }

  if (wants("classify")) {
    rec.guarded({{"classify.label", 0.0}}, [&] {
      const ClassLabel label = classify(r, p, budget, cfg.seed, tp);
      rec.add("classify.label", label.label == model.expected ? 0.0 : 1.0, 0.0);
    });
  }
  return report;
}

/// Human-readable description of the config and report formats.
inline std::string report_schema() {
  std::string out;
  out += "CONFIG FORMAT (one 'key = value' per line, '#' starts a comment, unknown keys are errors)\n";
  const ScenarioConfig defaults;
  for (const auto& [key, value] : config_entries(defaults)) out += "  " + key + " (default: " + value + ")\n";
  out += "  models: ";
  for (std::size_t i = 0; i < model_names().size(); ++i) out += (i ? ", " : "") + model_names()[i];
  out += "\n  checks: ";
  for (std::size_t i = 0; i < check_groups().size(); ++i) out += (i ? ", " : "") + check_groups()[i];
  out += "\n\nREPORT FORMAT\n";
  out += "  TOOLKIT <name> <version>\n";
  out += "  CONFIG <key> = <value>          (one per config key, re-parseable)\n";
  out += "  CHECK <id> <PASS|FAIL> defect=<17 significant digits> tol=<decimal>\n";
  out += "  SUMMARY pass=<k> fail=<m> seed=<seed>\n";
  out += "  A JSON mirror with the same fields is written to <report_path>.json.\n";
  out += "\nEXIT CODES\n  0 all checks pass\n  1 at least one check failed\n  2 configuration or usage error\n";
  return out;
}

}  // namespace nkcurv
