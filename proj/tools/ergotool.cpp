// Command-line front end for the cleaning-equipment design toolkit.
// Subcommands: optimize, scoop, handle, doe, reba, check.
// Exit codes: 0 success, 1 input/config error, 2 domain infeasibility.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "ergo/config.hpp"
#include "ergo/doe.hpp"
#include "ergo/handle.hpp"
#include "ergo/mechanism.hpp"
#include "ergo/optimizer.hpp"
#include "ergo/reba.hpp"
#include "ergo/report.hpp"
#include "ergo/scooping.hpp"

namespace {

using ergo::report::sig6;
using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitDomain = 2;

json geometry_json(const ergo::mech::MechanismGeometry& g) {
  return {{"oe_cm", sig6(g.oe_cm)},      {"cb_cm", sig6(g.cb_cm)},
          {"bd_cm", sig6(g.bd_cm)},      {"fe_cm", sig6(g.fe_cm)},
          {"gd_cm", sig6(g.gd_cm)},      {"width_cm", sig6(g.width_cm)},
          {"alpha_max_deg", sig6(g.alpha_max_deg)}, {"gamma_max_deg", sig6(g.gamma_max_deg)}};
}

json slacks_json(const ergo::mech::ConstraintSlacks& s) {
  return {{"handle_height_cm", sig6(s.handle_height_cm)},
          {"volume_cm3", sig6(s.volume_cm3)},
          {"turning_cm", sig6(s.turning_cm)},
          {"feasible", s.feasible}};
}

void write_report(const ergo::config::RunConfig& cfg, const std::string& name, const json& doc) {
  const auto path = std::filesystem::path(cfg.out_dir) / (name + "_report.json");
  ergo::report::write_file(path.string(), doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

void write_csv_mirror(const ergo::config::RunConfig& cfg, const std::string& name,
                      const std::string& content) {
  if (cfg.format != "csv") return;
  const auto path = std::filesystem::path(cfg.out_dir) / (name + ".csv");
  ergo::report::write_file(path.string(), content);
  std::cout << "wrote " << path.string() << "\n";
}

void require_path(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::runtime_error("config does not set " + what);
  if (!std::filesystem::exists(path)) throw std::runtime_error(what + " not found: " + path);
}

int cmd_check(const ergo::config::RunConfig& cfg) {
  const auto slacks = ergo::mech::check_feasibility(cfg.geometry, cfg.bounds, cfg.tolerance);
  json doc{{"command", "check"},
           {"geometry", geometry_json(cfg.geometry)},
           {"tolerance", sig6(cfg.tolerance)},
           {"slacks", slacks_json(slacks)}};
  write_report(cfg, "check", doc);
  return slacks.feasible ? kExitOk : kExitDomain;
}

int cmd_optimize(const ergo::config::RunConfig& cfg) {
  const auto problem = cfg.make_problem();
  const auto solved = ergo::opt::solve(problem);
  const auto oracle = ergo::opt::grid_search_oracle(problem, cfg.oracle_resolution_cm);

  json doc{{"command", "optimize"}};
  doc["solver"] = {{"status", ergo::opt::to_string(solved.status)},
                   {"geometry", geometry_json(solved.geometry)},
                   {"objective", sig6(solved.objective)},
                   {"slacks", slacks_json(solved.slacks)},
                   {"trace",
                    {{"starts", solved.trace.starts},
                     {"best_start", solved.trace.best_start},
                     {"outer_iterations", solved.trace.outer_iterations}}}};
  doc["oracle"] = {{"status", ergo::opt::to_string(oracle.status)},
                   {"resolution_cm", sig6(cfg.oracle_resolution_cm)},
                   {"geometry", geometry_json(oracle.geometry)},
                   {"objective", sig6(oracle.objective)}};
  const bool certified = solved.status == ergo::opt::Status::optimal &&
                         (oracle.status != ergo::opt::Status::optimal ||
                          solved.objective >= 0.99 * oracle.objective);
  doc["solver_within_oracle_margin"] = certified;
  write_report(cfg, "optimize", doc);
  return solved.status == ergo::opt::Status::optimal ? kExitOk : kExitDomain;
}

int cmd_scoop(const ergo::config::RunConfig& cfg) {
  require_path(cfg.materials_path, "scoop.materials");
  const auto materials = ergo::scoop::load_materials_csv(cfg.materials_path);
  if (materials.empty()) throw std::runtime_error("material database is empty: " + cfg.materials_path);
  const auto& cond = cfg.scoop_conditions;

  json rows = json::array();
  std::ostringstream mirror;
  mirror << "name,effective_rho_mu,provenance,depth_cm,scoop_force_n,resistance_n\n";
  for (const auto& m : materials) {
    const double depth = ergo::scoop::penetration_depth(m, cond);
    const double force = ergo::scoop::scoop_force(cond, depth);
    const double resist = ergo::scoop::resistance_force(m, cond, depth);
    rows.push_back({{"name", m.name},
                    {"effective_rho_mu", sig6(m.effective_rho_mu)},
                    {"provenance", m.calibrated ? "calibrated" : "measured"},
                    {"depth_cm", sig6(depth * 100.0)},
                    {"scoop_force_n", sig6(force)},
                    {"resistance_n", sig6(resist)}});
    mirror << m.name << ',' << sig6(m.effective_rho_mu) << ','
           << (m.calibrated ? "calibrated" : "measured") << ',' << sig6(depth * 100.0) << ','
           << sig6(force) << ',' << sig6(resist) << "\n";
  }
  const auto plate = ergo::scoop::base_plate_length(materials, cond);
  json doc{{"command", "scoop"},
           {"conditions",
            {{"kerb_mass_kg", sig6(cond.kerb_mass_kg)},
             {"approach_velocity_ms", sig6(cond.approach_velocity_ms)},
             {"final_velocity_ms", sig6(cond.final_velocity_ms)},
             {"bucket_area_m2", sig6(cond.bucket_area_m2)},
             {"gravity_ms2", sig6(cond.gravity_ms2)},
             {"blade_width_cm", sig6(cond.blade_width_cm)}}},
           {"materials", rows},
           {"plate_length_cm", plate.length_cm},
           {"degenerate", plate.degenerate}};
  write_report(cfg, "scoop", doc);
  write_csv_mirror(cfg, "scoop_depths", mirror.str());
  return plate.degenerate ? kExitDomain : kExitOk;
}

int cmd_handle(const ergo::config::RunConfig& cfg) {
  require_path(cfg.lift_curve_path, "handle.lift_curve");
  require_path(cfg.push_curve_path, "handle.push_curve");
  require_path(cfg.pull_curve_path, "handle.pull_curve");
  const auto lift = ergo::handle::load_bcf_csv(cfg.lift_curve_path);
  const auto push = ergo::handle::load_bcf_csv(cfg.push_curve_path);
  const auto pull = ergo::handle::load_bcf_csv(cfg.pull_curve_path);

  const auto lift_sel = ergo::handle::min_lift_height(lift, cfg.spike_ratio);
  const auto tiers = ergo::handle::tier_layout(cfg.bounds.max_handle_height_cm,
                                               lift_sel.height_cm, cfg.bounds.tier_gap_cm);
  const auto maneuver = ergo::handle::maneuver_height(push, pull);

  json tier_list = json::array();
  for (double t : tiers) tier_list.push_back(sig6(t));
  json doc{{"command", "handle"},
           {"lift",
            {{"min_height_cm", sig6(lift_sel.height_cm)},
             {"spike_found", lift_sel.spike_found},
             {"spike_ratio", sig6(cfg.spike_ratio)}}},
           {"tiers_cm", tier_list},
           {"maneuver",
            {{"height_cm", sig6(maneuver.height_cm)},
             {"rank_push", sig6(maneuver.rank_push)},
             {"rank_pull", sig6(maneuver.rank_pull)},
             {"rationale", maneuver.rationale}}}};
  write_report(cfg, "handle", doc);
  return kExitOk;
}

int cmd_doe(const ergo::config::RunConfig& cfg) {
  require_path(cfg.observations_path, "doe.observations");
  if (cfg.factors.empty()) throw std::runtime_error("config does not declare doe.factors");
  const auto obs = ergo::doe::load_observations_csv(cfg.observations_path, cfg.factors);
  const auto model = ergo::doe::fit_stepwise(obs, cfg.alpha_enter, cfg.alpha_remove);
  const double r2 = ergo::doe::r_squared(model, obs);
  const auto table = ergo::doe::anova(model, obs);
  const auto best =
      ergo::doe::desirability_optimize(model, obs, ergo::doe::grid_from_levels(obs.design));

  json terms = json::array();
  for (std::size_t i = 0; i < model.included.size(); ++i)
    terms.push_back({{"term", model.term(i).name}, {"coefficient", sig6(model.coefficients[i])}});

  json anova_rows = json::array();
  std::ostringstream mirror;
  mirror << "term,df,adj_ss,adj_ms,f,p\n";
  for (const auto& row : table.rows) {
    anova_rows.push_back({{"term", row.term},
                          {"df", row.df},
                          {"adj_ss", sig6(row.adj_ss)},
                          {"adj_ms", sig6(row.adj_ms)},
                          {"f", sig6(row.f)},
                          {"p", sig6(row.p)}});
    mirror << row.term << ',' << row.df << ',' << sig6(row.adj_ss) << ',' << sig6(row.adj_ms)
           << ',' << sig6(row.f) << ',' << sig6(row.p) << "\n";
  }

  json settings = json::array();
  for (const auto& s : best.settings)
    settings.push_back({{"factor", s.factor}, {"value", s.value}});

  json doc{{"command", "doe"},
           {"design",
            {{"runs", obs.design.runs.size()},
             {"replications", obs.design.replications},
             {"cells", obs.design.cell_count()}}},
           {"model", {{"terms", terms}, {"sse", sig6(model.sse)}, {"dfe", model.dfe}}},
           {"r_squared_pct", sig6(r2)},
           {"anova", anova_rows},
           {"desirability",
            {{"settings", settings},
             {"predicted", sig6(best.predicted)},
             {"desirability", sig6(best.desirability)}}}};
  write_report(cfg, "doe", doc);
  write_csv_mirror(cfg, "anova", mirror.str());
  return kExitOk;
}

int cmd_reba(const ergo::config::RunConfig& cfg) {
  require_path(cfg.postures_path, "reba.postures");
  const auto batch = ergo::reba::batch_score(cfg.postures_path);

  json rows = json::array();
  std::ostringstream mirror;
  mirror << "line,status,left_a,left_b,left_c,left_final,right_a,right_b,right_c,right_final,risk_band\n";
  for (const auto& row : batch) {
    if (!row.ok) {
      rows.push_back({{"line", row.line}, {"error", row.error}});
      mirror << row.line << ",error,,,,,,,,,\n";
      continue;
    }
    const auto& res = row.result;
    auto side = [](const ergo::reba::SideScore& s) {
      return json{{"score_a", s.score_a},
                  {"score_b", s.score_b},
                  {"score_c", s.score_c},
                  {"final", s.final_score},
                  {"band", ergo::reba::to_string(s.band)}};
    };
    rows.push_back({{"line", row.line},
                    {"left", side(res.left)},
                    {"right", side(res.right)},
                    {"risk_band", ergo::reba::to_string(res.risk_band)}});
    mirror << row.line << ",ok," << res.left.score_a << ',' << res.left.score_b << ','
           << res.left.score_c << ',' << res.left.final_score << ',' << res.right.score_a << ','
           << res.right.score_b << ',' << res.right.score_c << ',' << res.right.final_score << ','
           << ergo::reba::to_string(res.risk_band) << "\n";
  }
  json doc{{"command", "reba"}, {"rows", rows}};
  write_report(cfg, "reba", doc);
  write_csv_mirror(cfg, "reba_scores", mirror.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"design toolkit for manually operated cleaning equipment"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  app.add_option("--config", config_path, "config file (key = value sections)");
  app.add_option("--out", out_dir, "output directory (overrides io.out_dir)");
  app.add_option("--format", format, "json or csv (csv adds table mirrors)");

  auto* sc_optimize = app.add_subcommand("optimize", "solve the link-length optimisation");
  auto* sc_scoop = app.add_subcommand("scoop", "penetration depths and base-plate length");
  auto* sc_handle = app.add_subcommand("handle", "lifting and maneuvering handle selection");
  auto* sc_doe = app.add_subcommand("doe", "factorial analysis of the wheel experiment");
  auto* sc_reba = app.add_subcommand("reba", "batch posture scoring");
  auto* sc_check = app.add_subcommand("check", "feasibility check of the configured geometry");
  for (auto* sc : {sc_optimize, sc_scoop, sc_handle, sc_doe, sc_reba, sc_check})
    sc->fallthrough();  // --config/--out/--format may follow the subcommand

  CLI11_PARSE(app, argc, argv);

  try {
    ergo::config::RunConfig cfg;
    if (!config_path.empty()) cfg = ergo::config::parse_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) {
      if (format != "json" && format != "csv") throw std::runtime_error("--format must be json or csv");
      cfg.format = format;
    }

    if (sc_optimize->parsed()) return cmd_optimize(cfg);
    if (sc_scoop->parsed()) return cmd_scoop(cfg);
    if (sc_handle->parsed()) return cmd_handle(cfg);
    if (sc_doe->parsed()) return cmd_doe(cfg);
    if (sc_reba->parsed()) return cmd_reba(cfg);
    if (sc_check->parsed()) return cmd_check(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
