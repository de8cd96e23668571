// nkverify: command-line driver for the curvature checks.
//
//   nkverify verify --config scenarios/s6.cfg --out s6.report
//   nkverify classify --model product --n 3 --c 4
//   nkverify range --model s6 --samples 500
//   nkverify report-schema

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nkcurv/nkcurv.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ModelFlags {
  std::string model = "s6";
  std::optional<int> n;
  std::optional<double> c;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> samples;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model, "cn | cpn | cdn | s6 | product | custom-chart")->capture_default_str();
  cmd->add_option("--n", f.n, "complex dimension");
  cmd->add_option("--c", f.c, "holomorphic sectional curvature of the space form");
  cmd->add_option("--seed", f.seed, "seed for sampling");
  cmd->add_option("--tol", f.tol, "decision tolerance");
  cmd->add_option("--samples", f.samples, "number of sampled planes");
}

nkcurv::ScenarioConfig config_from_flags(const ModelFlags& f) {
  nkcurv::ScenarioConfig cfg;
  cfg.model = f.model;
  if (f.model != "s6" && !f.n) cfg.n = 3;
  if (f.n) cfg.n = *f.n;
  if (f.model == "cdn" && !f.c) cfg.c = -4.0;
  if (f.model == "cn" && !f.c) cfg.c = 0.0;
  if (f.c) cfg.c = *f.c;
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol) cfg.tol_structural = *f.tol;
  if (f.samples) cfg.samples = *f.samples;
  cfg.checks = {"classify"};
  nkcurv::validate(cfg);
  return cfg;
}

int run_verify(const std::string& config_path, const std::optional<std::string>& out,
               const std::optional<std::uint64_t>& seed, const std::optional<double>& tol,
               const std::optional<int>& samples) {
  nkcurv::ScenarioConfig cfg = nkcurv::load_config(config_path);
  if (out) cfg.report_path = *out;
  if (seed) cfg.seed = *seed;
  if (tol) cfg.tol_structural = *tol;
  if (samples) cfg.samples = *samples;
  nkcurv::validate(cfg);
  const nkcurv::Report report = nkcurv::run_scenario(cfg);
  if (cfg.report_path.empty())
    std::cout << nkcurv::format_report(report);
  else
    nkcurv::write_report(report, cfg.report_path);
  for (const auto& r : report.records)
    if (!r.message.empty()) std::cerr << "nkverify: " << r.id << ": " << r.message << "\n";
  return report.all_pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature checks for nearly Kaehler manifolds of constant antiholomorphic curvature"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "run a scenario config and write its report");
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> verify_seed;
  std::optional<double> verify_tol;
  std::optional<int> verify_samples;
  verify->add_option("--config", config_path, "scenario config file")->required();
  verify->add_option("--out", out, "report path (overrides report_path; '-' for stdout)");
  verify->add_option("--seed", verify_seed, "override the config seed");
  verify->add_option("--tol", verify_tol, "override tol_structural");
  verify->add_option("--samples", verify_samples, "override samples");

  ModelFlags classify_flags;
  auto* classify = app.add_subcommand("classify", "classify the pointwise curvature of a model");
  add_model_flags(classify, classify_flags);

  ModelFlags range_flags;
  auto* range = app.add_subcommand("range", "extremes of the antiholomorphic sectional curvature");
  add_model_flags(range, range_flags);

  app.add_subcommand("report-schema", "print the config and report formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*verify) {
      if (out && *out == "-") out = std::string();
      return run_verify(config_path, out, verify_seed, verify_tol, verify_samples);
    }
    if (*classify) {
      const nkcurv::ScenarioConfig cfg = config_from_flags(classify_flags);
      const nkcurv::ModelInstance m = nkcurv::build_model(cfg);
      const double tol = m.exact ? cfg.tol_structural : cfg.tol_chart;
      const nkcurv::ClassLabel label =
          nkcurv::classify(m.curvature, m.point, {cfg.samples, cfg.refine_steps}, cfg.seed, tol);
      std::printf("model %s\nlabel %s\nnu %.16e\nnu_min %.16e\nnu_max %.16e\nholomorphic %.16e\ntau_gap %.16e\n",
                  cfg.model.c_str(), nkcurv::to_string(label.label), label.nu, label.nu_min, label.nu_max,
                  label.holomorphic_curvature_estimate, label.tau_gap);
      return kExitPass;
    }
    if (*range) {
      const nkcurv::ScenarioConfig cfg = config_from_flags(range_flags);
      const nkcurv::ModelInstance m = nkcurv::build_model(cfg);
      const nkcurv::CurvatureRange r =
          nkcurv::antiholo_range(m.curvature, m.point, {cfg.samples, cfg.refine_steps}, cfg.seed);
      std::printf("model %s\nnu_min %.16e\nnu_max %.16e\n", cfg.model.c_str(), r.nu_min, r.nu_max);
      return kExitPass;
    }
    std::cout << nkcurv::report_schema();
    return kExitPass;
  } catch (const nkcurv::Error& e) {
    std::cerr << "nkverify: " << e.what() << "\n";
    return e.code() == nkcurv::ErrorCode::Configuration ? kExitUsage : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "nkverify: " << e.what() << "\n";
    return kExitFail;
  }
}
