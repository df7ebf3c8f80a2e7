#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergo/anthro.hpp"
#include "ergo/csv.hpp"
#include "ergo/doe.hpp"
#include "ergo/mechanism.hpp"
#include "ergo/optimizer.hpp"
#include "ergo/scooping.hpp"

namespace ergo::config {

/// Bundle of run parameters for the CLI. Every key has a default equal to
/// the design study's value; a config file overrides selectively.
struct RunConfig {
  mech::MechanismGeometry geometry{78.0, 24.0, 4.0};
  anthro::ConstraintBounds bounds;

  double alpha_eval_deg = 60.0;
  double gamma_eval_deg = 90.0;
  double gamma_max_deg = 120.0;
  double oe_max_cm = 115.0, cb_max_cm = 115.0, bd_max_cm = 115.0;
  double tolerance = 0.25;
  double oracle_resolution_cm = 0.5;

  scoop::ScoopConditions scoop_conditions;
  std::string materials_path;

  std::string lift_curve_path, push_curve_path, pull_curve_path;
  double spike_ratio = 0.15;

  std::string observations_path;
  std::vector<doe::Factor> factors;
  double alpha_enter = 0.15, alpha_remove = 0.15;

  std::string postures_path;

  std::string out_dir = "out";
  std::string format = "json";

  opt::OptimizationProblem make_problem() const {
    opt::OptimizationProblem p;
    p.bounds = bounds;
    p.alpha_eval_deg = alpha_eval_deg;
    p.gamma_eval_deg = gamma_eval_deg;
    p.gamma_max_deg = gamma_max_deg;
    p.oe_max_cm = oe_max_cm;
    p.cb_max_cm = cb_max_cm;
    p.bd_max_cm = bd_max_cm;
    p.tolerance = tolerance;
    return p;
  }
};

namespace detail {

inline double num(const std::string& v, const std::string& key) {
  return csv::to_double(v, "config key " + key);
}

inline std::vector<doe::Factor> parse_factors(const std::string& spec) {
  std::vector<doe::Factor> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, '|')) {
    part = csv::trim(part);
    if (part.empty()) continue;
    std::stringstream ps(part);
    std::string name, kind, levels;
    if (!std::getline(ps, name, ':') || !std::getline(ps, kind, ':') || !std::getline(ps, levels))
      throw std::invalid_argument("factor spec must be name:kind:levels, got '" + part + "'");
    doe::Factor f;
    f.name = csv::trim(name);
    const std::string k = csv::trim(kind);
    if (k == "continuous")
      f.kind = doe::FactorKind::continuous;
    else if (k == "categorical")
      f.kind = doe::FactorKind::categorical;
    else
      throw std::invalid_argument("factor kind must be continuous or categorical, got '" + k + "'");
    std::stringstream ls(levels);
    std::string lv;
    while (std::getline(ls, lv, ',')) {
      lv = csv::trim(lv);
      if (f.kind == doe::FactorKind::continuous)
        f.numeric_levels.push_back(num(lv, "factor " + f.name));
      else
        f.label_levels.push_back(lv);
    }
    f.validate();
    out.push_back(std::move(f));
  }
  if (out.empty()) throw std::invalid_argument("factor spec declares no factors");
  return out;
}

}  // namespace detail

/// Key/value config with [section] headers, '#' comments and paths resolved
/// relative to the config file. Unknown sections or keys are rejected.
inline RunConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const auto base_dir = std::filesystem::path(path).parent_path();

  RunConfig cfg;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base_dir / fp).string();
  };

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"geometry.oe", [&](const std::string& v) { cfg.geometry.oe_cm = detail::num(v, "geometry.oe"); }},
      {"geometry.cb", [&](const std::string& v) { cfg.geometry.cb_cm = detail::num(v, "geometry.cb"); }},
      {"geometry.bd", [&](const std::string& v) { cfg.geometry.bd_cm = detail::num(v, "geometry.bd"); }},
      {"geometry.fe", [&](const std::string& v) { cfg.geometry.fe_cm = detail::num(v, "geometry.fe"); }},
      {"geometry.gd", [&](const std::string& v) { cfg.geometry.gd_cm = detail::num(v, "geometry.gd"); }},
      {"geometry.width", [&](const std::string& v) { cfg.geometry.width_cm = detail::num(v, "geometry.width"); }},
      {"geometry.alpha_max", [&](const std::string& v) { cfg.geometry.alpha_max_deg = detail::num(v, "geometry.alpha_max"); }},
      {"geometry.gamma_max", [&](const std::string& v) { cfg.geometry.gamma_max_deg = detail::num(v, "geometry.gamma_max"); }},
      {"bounds.max_handle_height", [&](const std::string& v) { cfg.bounds.max_handle_height_cm = detail::num(v, "bounds.max_handle_height"); }},
      {"bounds.min_equipment_width", [&](const std::string& v) { cfg.bounds.min_equipment_width_cm = detail::num(v, "bounds.min_equipment_width"); }},
      {"bounds.worker_depth", [&](const std::string& v) { cfg.bounds.worker_depth_cm = detail::num(v, "bounds.worker_depth"); }},
      {"bounds.max_turning_width", [&](const std::string& v) { cfg.bounds.max_turning_width_cm = detail::num(v, "bounds.max_turning_width"); }},
      {"bounds.min_container_volume", [&](const std::string& v) { cfg.bounds.min_container_volume_cm3 = detail::num(v, "bounds.min_container_volume"); }},
      {"bounds.ground_clearance", [&](const std::string& v) { cfg.bounds.ground_clearance_cm = detail::num(v, "bounds.ground_clearance"); }},
      {"bounds.slider_gap", [&](const std::string& v) { cfg.bounds.slider_gap_cm = detail::num(v, "bounds.slider_gap"); }},
      {"bounds.tier_gap", [&](const std::string& v) { cfg.bounds.tier_gap_cm = detail::num(v, "bounds.tier_gap"); }},
      {"optimizer.alpha_eval", [&](const std::string& v) { cfg.alpha_eval_deg = detail::num(v, "optimizer.alpha_eval"); }},
      {"optimizer.gamma_eval", [&](const std::string& v) { cfg.gamma_eval_deg = detail::num(v, "optimizer.gamma_eval"); }},
      {"optimizer.gamma_max", [&](const std::string& v) { cfg.gamma_max_deg = detail::num(v, "optimizer.gamma_max"); }},
      {"optimizer.oe_max", [&](const std::string& v) { cfg.oe_max_cm = detail::num(v, "optimizer.oe_max"); }},
      {"optimizer.cb_max", [&](const std::string& v) { cfg.cb_max_cm = detail::num(v, "optimizer.cb_max"); }},
      {"optimizer.bd_max", [&](const std::string& v) { cfg.bd_max_cm = detail::num(v, "optimizer.bd_max"); }},
      {"optimizer.tolerance", [&](const std::string& v) { cfg.tolerance = detail::num(v, "optimizer.tolerance"); }},
      {"optimizer.oracle_resolution", [&](const std::string& v) { cfg.oracle_resolution_cm = detail::num(v, "optimizer.oracle_resolution"); }},
      {"scoop.materials", [&](const std::string& v) { cfg.materials_path = resolve(v); }},
      {"scoop.kerb_mass", [&](const std::string& v) { cfg.scoop_conditions.kerb_mass_kg = detail::num(v, "scoop.kerb_mass"); }},
      {"scoop.approach_velocity", [&](const std::string& v) { cfg.scoop_conditions.approach_velocity_ms = detail::num(v, "scoop.approach_velocity"); }},
      {"scoop.final_velocity", [&](const std::string& v) { cfg.scoop_conditions.final_velocity_ms = detail::num(v, "scoop.final_velocity"); }},
      {"scoop.bucket_area", [&](const std::string& v) { cfg.scoop_conditions.bucket_area_m2 = detail::num(v, "scoop.bucket_area"); }},
      {"scoop.gravity", [&](const std::string& v) { cfg.scoop_conditions.gravity_ms2 = detail::num(v, "scoop.gravity"); }},
      {"scoop.blade_width", [&](const std::string& v) { cfg.scoop_conditions.blade_width_cm = detail::num(v, "scoop.blade_width"); }},
      {"handle.lift_curve", [&](const std::string& v) { cfg.lift_curve_path = resolve(v); }},
      {"handle.push_curve", [&](const std::string& v) { cfg.push_curve_path = resolve(v); }},
      {"handle.pull_curve", [&](const std::string& v) { cfg.pull_curve_path = resolve(v); }},
      {"handle.spike_ratio", [&](const std::string& v) { cfg.spike_ratio = detail::num(v, "handle.spike_ratio"); }},
      {"doe.observations", [&](const std::string& v) { cfg.observations_path = resolve(v); }},
      {"doe.factors", [&](const std::string& v) { cfg.factors = detail::parse_factors(v); }},
      {"doe.alpha_enter", [&](const std::string& v) { cfg.alpha_enter = detail::num(v, "doe.alpha_enter"); }},
      {"doe.alpha_remove", [&](const std::string& v) { cfg.alpha_remove = detail::num(v, "doe.alpha_remove"); }},
      {"reba.postures", [&](const std::string& v) { cfg.postures_path = resolve(v); }},
      {"io.out_dir", [&](const std::string& v) { cfg.out_dir = v; }},
      {"io.format", [&](const std::string& v) {
         if (v != "json" && v != "csv") throw std::invalid_argument("io.format must be json or csv");
         cfg.format = v;
       }},
  };

  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = csv::trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = csv::trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = section + "." + csv::trim(s.substr(0, eq));
    const std::string value = csv::trim(s.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    it->second(value);
  }
  return cfg;
}

}  // namespace ergo::config
