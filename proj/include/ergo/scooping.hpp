#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergo/csv.hpp"

namespace ergo::scoop {

/// Scooped-material properties. Density and friction may be unknown as long
/// as the effective product rho*mu is; such specs are flagged calibrated.
struct MaterialSpec {
  std::string name;
  std::optional<double> density_kgm3;  // rho
  std::optional<double> friction_mu;   // mu
  double effective_rho_mu = 0.0;
  bool calibrated = false;

  void validate() const {
    if (!(effective_rho_mu > 0))
      throw std::invalid_argument("material '" + name + "': effective rho*mu must be > 0");
    if (density_kgm3 && friction_mu) {
      const double prod = *density_kgm3 * *friction_mu;
      if (std::abs(prod - effective_rho_mu) > 1e-9 * std::abs(prod))
        throw std::invalid_argument("material '" + name + "': effective_rho_mu != rho*mu");
    }
  }

  static MaterialSpec measured(std::string name, double rho, double mu) {
    MaterialSpec m;
    m.name = std::move(name);
    m.density_kgm3 = rho;
    m.friction_mu = mu;
    m.effective_rho_mu = rho * mu;
    m.validate();
    return m;
  }
};

/// SI units throughout; centimetres only at the reporting boundary.
struct ScoopConditions {
  double kerb_mass_kg = 38.0;
  double approach_velocity_ms = 0.5;
  double final_velocity_ms = 0.0;
  double bucket_area_m2 = 0.063;
  double gravity_ms2 = 9.81;
  double blade_width_cm = 45.0;

  void validate() const {
    if (!(kerb_mass_kg > 0 && bucket_area_m2 > 0 && gravity_ms2 > 0))
      throw std::invalid_argument("scoop conditions: mass, area and gravity must be > 0");
    if (!(final_velocity_ms >= 0 && final_velocity_ms <= approach_velocity_ms))
      throw std::invalid_argument("scoop conditions: require 0 <= v <= u");
  }

  double kinetic_term() const {  // m (u^2 - v^2)
    return kerb_mass_kg *
           (approach_velocity_ms * approach_velocity_ms - final_velocity_ms * final_velocity_ms);
  }
};

/// Depth at which the material resistance absorbs the approach kinetic
/// energy: s = sqrt( m (u^2 - v^2) / (2 rho mu A g) ). Metres.
inline double penetration_depth(const MaterialSpec& mat, const ScoopConditions& cond) {
  mat.validate();
  cond.validate();
  const double denom = 2.0 * mat.effective_rho_mu * cond.bucket_area_m2 * cond.gravity_ms2;
  if (denom == 0.0) throw std::domain_error("penetration_depth: zero rho*mu*A*g");
  return std::sqrt(cond.kinetic_term() / denom);
}

/// Decelerating force needed to stop over distance s: m (u^2 - v^2) / (2 s).
inline double scoop_force(const ScoopConditions& cond, double s_m) {
  cond.validate();
  if (s_m <= 0.0) throw std::domain_error("scoop_force: penetration distance must be > 0");
  return cond.kinetic_term() / (2.0 * s_m);
}

/// Frictional resistance of the displaced material column: mu rho A s g.
inline double resistance_force(const MaterialSpec& mat, const ScoopConditions& cond, double s_m) {
  mat.validate();
  cond.validate();
  if (s_m < 0.0) throw std::invalid_argument("resistance_force: s must be >= 0");
  return mat.effective_rho_mu * cond.bucket_area_m2 * s_m * cond.gravity_ms2;
}

struct PlateLength {
  int length_cm = 0;
  bool degenerate = false;  // shortest depth was below 1 cm
};

/// Shortest penetration depth over the material set, floored to whole cm so
/// the plate is fully used even in the hardest material.
inline PlateLength base_plate_length(std::span<const MaterialSpec> materials,
                                     const ScoopConditions& cond) {
  if (materials.empty()) throw std::invalid_argument("base_plate_length: no materials");
  double min_depth_m = penetration_depth(materials.front(), cond);
  for (const auto& m : materials.subspan(1))
    min_depth_m = std::min(min_depth_m, penetration_depth(m, cond));
  PlateLength p;
  p.length_cm = static_cast<int>(std::floor(min_depth_m * 100.0));
  p.degenerate = p.length_cm < 1;
  return p;
}

/// Inverts the penetration relation for materials with unknown rho and mu:
/// rho*mu = m (u^2 - v^2) / (2 A g s^2).
inline MaterialSpec calibrate_material(std::string name, double target_depth_m,
                                       const ScoopConditions& cond) {
  cond.validate();
  if (!(target_depth_m > 0)) throw std::domain_error("calibrate_material: target depth must be > 0");
  MaterialSpec m;
  m.name = std::move(name);
  m.effective_rho_mu = cond.kinetic_term() /
                       (2.0 * cond.bucket_area_m2 * cond.gravity_ms2 * target_depth_m * target_depth_m);
  m.calibrated = true;
  m.validate();
  return m;
}

/// CSV header: name,density_kgm3,mu,effective_rho_mu
/// density/mu may be blank when the effective product is given directly.
inline std::vector<MaterialSpec> load_materials_csv(const std::string& path) {
  auto file = csv::read_file(path);
  auto c_name = csv::column(file, "name");
  auto c_rho = csv::column(file, "density_kgm3");
  auto c_mu = csv::column(file, "mu");
  auto c_eff = csv::column(file, "effective_rho_mu");
  std::vector<MaterialSpec> out;
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    const auto& r = file.rows[i];
    const std::string ctx = path + ":" + std::to_string(file.row_lines[i]);
    MaterialSpec m;
    m.name = r.at(c_name);
    const std::string rho = r.at(c_rho), mu = r.at(c_mu), eff = r.at(c_eff);
    if (!rho.empty()) m.density_kgm3 = csv::to_double(rho, ctx);
    if (!mu.empty()) m.friction_mu = csv::to_double(mu, ctx);
    if (!eff.empty())
      m.effective_rho_mu = csv::to_double(eff, ctx);
    else if (m.density_kgm3 && m.friction_mu)
      m.effective_rho_mu = *m.density_kgm3 * *m.friction_mu;
    else
      throw std::runtime_error("material row needs rho+mu or effective_rho_mu in " + ctx);
    m.calibrated = !(m.density_kgm3 && m.friction_mu);
    m.validate();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace ergo::scoop
