#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qmet/bayes.hpp"
#include "qmet/fisher.hpp"
#include "qmet/hb.hpp"
#include "qmet/io.hpp"
#include "qmet/noon2.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qmet;

namespace {

constexpr double kPi = std::numbers::pi;
using Kind = io::FieldSpec::Kind;

struct RunContext {
  std::string subcommand;
  fs::path config_path;
  fs::path out_dir;
  std::optional<std::uint64_t> seed_override;
  json config;
  std::uint64_t seed = 0;
  std::string digest;
  std::vector<fs::path> outputs;
  std::string started_at;
};

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void prepare(RunContext& ctx) {
  ctx.started_at = iso8601_now();
  ctx.config = io::load_config(ctx.config_path);
  ctx.digest = io::config_digest(ctx.config);
  fs::create_directories(ctx.out_dir);
  std::uint64_t seed = ctx.config.value("seed", std::uint64_t{0});
  if (ctx.seed_override) seed = *ctx.seed_override;
  ctx.seed = seed;
}

std::vector<std::string> csv_comments(const RunContext& ctx) {
  return {"tool=qmet " QMET_VERSION, "subcommand=" + ctx.subcommand,
          "config_digest=" + ctx.digest, "seed=" + std::to_string(ctx.seed)};
}

void write_manifest(RunContext& ctx) {
  json manifest;
  manifest["schema_version"] = 1;
  manifest["tool_version"] = QMET_VERSION;
  manifest["subcommand"] = ctx.subcommand;
  manifest["config_digest"] = ctx.digest;
  manifest["seed"] = ctx.seed;
  manifest["started_at"] = ctx.started_at;
  manifest["finished_at"] = iso8601_now();
  json outputs = json::array();
  for (const auto& path : ctx.outputs)
    outputs.push_back({{"path", path.filename().string()},
                       {"fnv1a64", io::file_digest_hex(path)}});
  manifest["outputs"] = outputs;
  io::write_text_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_json_output(RunContext& ctx, const std::string& name, json body) {
  body["config_digest"] = ctx.digest;
  const fs::path path = ctx.out_dir / name;
  io::write_text_file(path, body.dump(2) + "\n");
  ctx.outputs.push_back(path);
}

json sym2_json(const Sym2& m, const char* a, const char* b) {
  return {{std::string(a) + a, m.xx}, {std::string(b) + b, m.yy},
          {std::string(a) + b, m.xy}};
}

bayes::PriorSpec prior_from_config(const json& prior_cfg, double phi_center) {
  io::validate_schema(prior_cfg,
                      {{"phi_center", Kind::Number, false},
                       {"phi_halfwidth", Kind::Number, false},
                       {"v_lo", Kind::Number, false},
                       {"v_hi", Kind::Number, false},
                       {"resolution", Kind::Integer, false}},
                      "prior");
  const double center = prior_cfg.value("phi_center", phi_center);
  const double halfwidth = prior_cfg.value("phi_halfwidth", 0.25);
  bayes::PriorSpec prior;
  prior.phi_lo = center - halfwidth;
  prior.phi_hi = center + halfwidth;
  prior.v_lo = prior_cfg.value("v_lo", 0.90);
  prior.v_hi = prior_cfg.value("v_hi", 1.00);
  prior.resolution = prior_cfg.value("resolution", 512);
  return prior;
}

// Coarse likelihood scan used when the config gives no prior phase center.
double locate_phase(const bayes::CountRecord& counts, double v_lo, double v_hi) {
  double best_ll = -1e300, best_phi = 0.0;
  for (int i = 0; i < 720; ++i) {
    const double phi = (i + 0.5) * kPi / 720.0;
    for (int j = 0; j < 16; ++j) {
      const double v = v_lo + (j + 0.5) * (v_hi - v_lo) / 16.0;
      double ll = 0.0;
      for (size_t t = 0; t < counts.settings.size(); ++t) {
        const double p = noon2::prob_postselected(counts.settings[t], {phi, v});
        if (p <= 0.0) {
          if (counts.coincidences[t] > 0.0) ll = -1e300;
          continue;
        }
        ll += counts.coincidences[t] * std::log(p);
      }
      if (ll > best_ll) {
        best_ll = ll;
        best_phi = phi;
      }
    }
  }
  return best_phi;
}

void cmd_simulate(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"phi", Kind::Number, true},
                       {"v", Kind::Number, true},
                       {"events", Kind::Integer, true},
                       {"mode", Kind::String, false},
                       {"seed", Kind::Integer, false}},
                      "simulate config");
  const long events = ctx.config["events"].get<long>();
  if (events < 1) throw std::runtime_error("simulate: events must be >= 1");
  const std::string mode_name = ctx.config.value("mode", "postselected");
  bayes::SampleMode mode;
  if (mode_name == "postselected")
    mode = bayes::SampleMode::Postselected;
  else if (mode_name == "full")
    mode = bayes::SampleMode::Full;
  else
    throw std::runtime_error("simulate: mode must be 'postselected' or 'full'");
  const noon2::ModelPoint point{ctx.config["phi"].get<double>(),
                                ctx.config["v"].get<double>()};
  const auto counts = bayes::sample_counts(point, events, ctx.seed, mode);
  const fs::path path = ctx.out_dir / "counts.csv";
  io::write_counts_csv(path, counts, csv_comments(ctx));
  ctx.outputs.push_back(path);
}

void cmd_estimate(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"counts", Kind::String, true},
                       {"prior", Kind::Object, false},
                       {"events", Kind::Integer, false},
                       {"seed", Kind::Integer, false}},
                      "estimate config");
  const auto counts = io::read_counts_csv(ctx.config["counts"].get<std::string>());
  const json prior_cfg = ctx.config.value("prior", json::object());
  double phi_center;
  if (prior_cfg.contains("phi_center"))
    phi_center = prior_cfg["phi_center"].get<double>();
  else
    phi_center = locate_phase(counts, prior_cfg.value("v_lo", 0.90),
                              prior_cfg.value("v_hi", 1.00));
  const bayes::PriorSpec prior = prior_from_config(prior_cfg, phi_center);
  const auto post = bayes::bayes_update(prior, counts);
  const auto est = bayes::moments(post);
  if (est.under_resolved)
    throw std::runtime_error(
        "estimate: posterior concentrates on fewer than 4 grid nodes; "
        "increase the prior resolution");
  const double events = counts.retained();
  const auto f = fisher::fisher_postselected({est.phi_b, est.v_b},
                                             noon2::canonical_settings());
  const auto bound = fisher::crb(f, events);
  const auto lrt_verbatim = fisher::lrt_statistic(f.m, est.cov, events,
                                                  fisher::LrtForm::Verbatim);
  const auto lrt_standard = fisher::lrt_statistic(f.m, est.cov, events,
                                                  fisher::LrtForm::Standard);
  json report;
  report["events"] = events;
  report["estimate"] = {{"phi", est.phi_b},
                        {"phi_units", "rad"},
                        {"v", est.v_b},
                        {"v_units", "dimensionless"}};
  report["covariance"] = sym2_json(est.cov, "phi", "v");
  report["covariance_units"] = {{"phiphi", "rad^2"},
                                {"vv", "dimensionless"},
                                {"phiv", "rad"}};
  report["fisher_postselected"] = sym2_json(f.m, "phi", "v");
  report["crb"] = sym2_json(bound.bound, "phi", "v");
  report["xi"] = bound.xi;
  report["lrt"] = {{"verbatim", lrt_verbatim.statistic},
                   {"standard", lrt_standard.statistic},
                   {"dof", 3},
                   {"critical_value_95", 7.81},
                   {"compatible_verbatim", lrt_verbatim.compatible},
                   {"compatible_standard", lrt_standard.compatible}};
  report["prior"] = {{"phi_lo", prior.phi_lo},
                     {"phi_hi", prior.phi_hi},
                     {"v_lo", prior.v_lo},
                     {"v_hi", prior.v_hi},
                     {"resolution", prior.resolution}};
  write_json_output(ctx, "estimate.json", report);
}

void cmd_fisher_scan(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"v", Kind::Number, true},
                       {"phi_lo", Kind::Number, false},
                       {"phi_hi", Kind::Number, false},
                       {"points", Kind::Integer, false},
                       {"events", Kind::Integer, false},
                       {"seed", Kind::Integer, false}},
                      "fisher-scan config");
  const double v = ctx.config["v"].get<double>();
  const double lo = ctx.config.value("phi_lo", 0.0);
  const double hi = ctx.config.value("phi_hi", kPi);
  const int points = ctx.config.value("points", 181);
  const double events = double(ctx.config.value("events", 70000));
  if (points < 2) throw std::runtime_error("fisher-scan: points must be >= 2");
  const auto& settings = noon2::canonical_settings();
  io::ColumnTable table;
  table.columns = {"phi",          "f_ps_phiphi",  "f_ps_vv",     "f_ps_phiv",
                   "f_full_phiphi","f_full_vv",    "f_full_phiv", "crb_phiphi",
                   "crb_vv",       "crb_phiv",     "xi_ps"};
  for (int i = 0; i < points; ++i) {
    const double phi = lo + (hi - lo) * double(i) / double(points - 1);
    const auto ps = fisher::fisher_postselected({phi, v}, settings);
    const auto full = fisher::fisher_full({phi, v}, settings);
    const auto bound = fisher::crb(ps, events);
    table.rows.push_back({phi, ps.m.xx, ps.m.yy, ps.m.xy, full.m.xx, full.m.yy,
                          full.m.xy, bound.bound.xx, bound.bound.yy,
                          bound.bound.xy, bound.xi});
  }
  const fs::path path = ctx.out_dir / "fisher_scan.csv";
  io::write_table_csv(path, table, csv_comments(ctx));
  ctx.outputs.push_back(path);
}

void cmd_hb_scaling(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"n_min", Kind::Integer, false},
                       {"n_max", Kind::Integer, false},
                       {"epsilon_list", Kind::Array, false},
                       {"phase_points", Kind::Integer, false},
                       {"h_phi", Kind::Number, false},
                       {"h_eps", Kind::Number, false},
                       {"richardson", Kind::Boolean, false},
                       {"seed", Kind::Integer, false}},
                      "hb-scaling config");
  const int n_min = ctx.config.value("n_min", 1);
  const int n_max = ctx.config.value("n_max", 10);
  if (n_min < 1 || n_max < n_min || n_max > 20)
    throw std::runtime_error("hb-scaling: need 1 <= n_min <= n_max <= 20");
  std::vector<double> eps_list = {0.14, 0.23, 0.32, 0.50, 1.0};
  if (ctx.config.contains("epsilon_list"))
    eps_list = ctx.config["epsilon_list"].get<std::vector<double>>();
  hb::StepSpec step;
  step.h_phi = ctx.config.value("h_phi", 1e-4);
  step.h_eps = ctx.config.value("h_eps", 1e-4);
  step.richardson = ctx.config.value("richardson", false);
  const int phase_points = ctx.config.value("phase_points", 181);
  std::vector<double> grid(phase_points);
  for (int i = 0; i < phase_points; ++i) grid[i] = double(i) * kPi / phase_points;
  std::vector<int> ns;
  for (int n = n_min; n <= n_max; ++n) ns.push_back(n);
  const auto points = hb::scaling_sweep(ns, eps_list, step, grid);
  io::ColumnTable table;
  table.columns = {"n",           "epsilon",     "phi_star_phi", "max_eff_f_phi",
                   "phi_star_eps","max_eff_f_eps","upsilon",     "ok"};
  for (const auto& pt : points)
    table.rows.push_back({double(pt.n_per_arm), pt.epsilon, pt.phi_star_phi,
                          pt.max_eff_phi, pt.phi_star_eps, pt.max_eff_eps,
                          pt.upsilon, pt.ok ? 1.0 : 0.0});
  const fs::path path = ctx.out_dir / "hb_scaling.csv";
  io::write_table_csv(path, table, csv_comments(ctx));
  ctx.outputs.push_back(path);
  for (const auto& pt : points)
    if (!pt.ok)
      std::cerr << "hb-scaling: point (N=" << pt.n_per_arm << ", eps=" << pt.epsilon
                << ") failed: " << pt.error << "\n";
}

void cmd_calibrate(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"phases", Kind::Object, true},
                       {"v", Kind::Number, true},
                       {"events", Kind::Integer, true},
                       {"seed", Kind::Integer, false},
                       {"noiseless", Kind::Boolean, false},
                       {"prior", Kind::Object, false}},
                      "calibrate config");
  const json& phases_cfg = ctx.config["phases"];
  io::validate_schema(phases_cfg,
                      {{"lo", Kind::Number, true},
                       {"hi", Kind::Number, true},
                       {"count", Kind::Integer, true}},
                      "calibrate phases");
  const int count = phases_cfg["count"].get<int>();
  if (count < 3) throw std::runtime_error("calibrate: need at least 3 phases");
  const double lo = phases_cfg["lo"].get<double>();
  const double hi = phases_cfg["hi"].get<double>();
  std::vector<double> phases(count);
  for (int i = 0; i < count; ++i)
    phases[i] = lo + (hi - lo) * double(i) / double(count - 1);
  bayes::CalibrationOptions opt;
  opt.noiseless = ctx.config.value("noiseless", false);
  if (ctx.config.contains("prior")) {
    const auto prior = prior_from_config(ctx.config["prior"], 0.0);
    opt.prior_phi_halfwidth = 0.5 * (prior.phi_hi - prior.phi_lo);
    opt.v_lo = prior.v_lo;
    opt.v_hi = prior.v_hi;
    opt.resolution = prior.resolution;
  }
  const double v = ctx.config["v"].get<double>();
  const double events = double(ctx.config["events"].get<long>());
  const auto result = bayes::calibration_sweep(phases, v, events, ctx.seed, opt);
  io::ColumnTable table;
  table.columns = {"imparted_phase", "phi_b", "v_b", "var_phi", "var_v",
                   "cov_phiv",       "events"};
  for (size_t i = 0; i < result.points.size(); ++i) {
    const auto& est = result.points[i];
    table.rows.push_back({result.phases[i], est.phi_b, est.v_b, est.cov.xx,
                          est.cov.yy, est.cov.xy, est.events});
  }
  const fs::path csv_path = ctx.out_dir / "calibration_points.csv";
  io::write_table_csv(csv_path, table, csv_comments(ctx));
  ctx.outputs.push_back(csv_path);
  json fit;
  fit["s_phi"] = {{"slope", result.phi_fit.slope},
                  {"slope_se", result.phi_fit.slope_se},
                  {"intercept", result.phi_fit.intercept},
                  {"intercept_se", result.phi_fit.intercept_se}};
  fit["s_v"] = {{"slope", result.v_fit.slope},
                {"slope_se", result.v_fit.slope_se},
                {"intercept", result.v_fit.intercept},
                {"intercept_se", result.v_fit.intercept_se}};
  write_json_output(ctx, "calibration_fit.json", fit);
}

void cmd_lrt_calibrate(RunContext& ctx) {
  io::validate_schema(ctx.config,
                      {{"phi", Kind::Number, true},
                       {"v", Kind::Number, true},
                       {"events", Kind::Integer, true},
                       {"repetitions", Kind::Integer, true},
                       {"seed", Kind::Integer, false},
                       {"prior", Kind::Object, false}},
                      "lrt-calibrate config");
  const noon2::ModelPoint point{ctx.config["phi"].get<double>(),
                                ctx.config["v"].get<double>()};
  const auto prior = prior_from_config(ctx.config.value("prior", json::object()),
                                       point.phi);
  const auto calib = fisher::lrt_null_calibration(
      point, ctx.config["events"].get<long>(),
      ctx.config["repetitions"].get<int>(), ctx.seed, prior);
  io::ColumnTable table;
  table.columns = {"rank", "l_verbatim", "l_standard"};
  for (size_t i = 0; i < calib.verbatim_stats.size(); ++i)
    table.rows.push_back({double(i), calib.verbatim_stats[i],
                          calib.standard_stats[i]});
  const fs::path csv_path = ctx.out_dir / "lrt_null.csv";
  io::write_table_csv(csv_path, table, csv_comments(ctx));
  ctx.outputs.push_back(csv_path);
  json report;
  for (const char* form : {"verbatim", "standard"}) {
    json q;
    const bool verbatim = std::string(form) == "verbatim";
    for (double p : {0.5, 0.9, 0.95, 0.99}) {
      const double value = verbatim ? calib.quantile_verbatim(p)
                                    : calib.quantile_standard(p);
      q[std::to_string(int(p * 100))] = value;
    }
    report[form] = q;
  }
  report["chi2_3_quantiles"] = {{"50", 2.366}, {"90", 6.251}, {"95", 7.815},
                                {"99", 11.345}};
  report["critical_value_95"] = 7.81;
  write_json_output(ctx, "lrt_null.json", report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon phase/visibility estimation toolkit"};
  app.require_subcommand(1);
  RunContext ctx;
  std::string config_arg, out_arg;
  std::uint64_t seed_arg = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_arg, "JSON config file")->required();
    sub->add_option("--out", out_arg, "output directory")->required();
    auto* seed_opt = sub->add_option("--seed", seed_arg, "override config seed");
    sub->callback([&, sub, seed_opt] {
      ctx.subcommand = sub->get_name();
      ctx.config_path = config_arg;
      ctx.out_dir = out_arg;
      if (seed_opt->count() > 0) ctx.seed_override = seed_arg;
    });
  };
  for (const char* name : {"simulate", "estimate", "fisher-scan", "hb-scaling",
                           "calibrate", "lrt-calibrate"})
    add_common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::json err = {{"error", {{"message", e.what()}, {"kind", "usage"}}}};
    std::cerr << err.dump() << "\n";
    return 2;
  }

  try {
    prepare(ctx);
    if (ctx.subcommand == "simulate")
      cmd_simulate(ctx);
    else if (ctx.subcommand == "estimate")
      cmd_estimate(ctx);
    else if (ctx.subcommand == "fisher-scan")
      cmd_fisher_scan(ctx);
    else if (ctx.subcommand == "hb-scaling")
      cmd_hb_scaling(ctx);
    else if (ctx.subcommand == "calibrate")
      cmd_calibrate(ctx);
    else if (ctx.subcommand == "lrt-calibrate")
      cmd_lrt_calibrate(ctx);
    write_manifest(ctx);
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error",
                           {{"message", e.what()},
                            {"subcommand", ctx.subcommand},
                            {"kind", "runtime"}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
