#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ergo/anthro.hpp"

namespace ergo::mech {

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Two-link lifting mechanism plus the equipment envelope.
/// All lengths in cm, all angles in degrees (converted to radians internally).
struct MechanismGeometry {
  double oe_cm = 0.0;  // horizontal frame link OE
  double cb_cm = 0.0;  // bucket-link segment CB
  double bd_cm = 0.0;  // bucket-link segment BD
  double fe_cm = 5.0;  // slider gap FE
  double gd_cm = 15.0; // ground clearance GD
  double width_cm = 50.0;
  double alpha_max_deg = 60.0;
  double gamma_max_deg = 120.0;  // 90 deg + angle of repose of the material

  void validate() const {
    if (oe_cm < 0 || cb_cm < 0 || bd_cm < 0)
      throw std::invalid_argument("link lengths must be non-negative");
    if (!(alpha_max_deg > 0 && alpha_max_deg < 90))
      throw std::invalid_argument("alpha_max must lie in (0, 90) degrees");
    if (!(gamma_max_deg > 0 && gamma_max_deg <= 180))
      throw std::invalid_argument("gamma_max must lie in (0, 180] degrees");
  }
};

/// Slot-joint length OB = 2*CB*cos(beta). beta must lie in [0, 90) degrees.
inline double slot_length(double cb_cm, double beta_deg) {
  if (cb_cm < 0) throw std::invalid_argument("slot_length: cb must be >= 0");
  if (!(beta_deg >= 0.0 && beta_deg < 90.0))
    throw std::invalid_argument("slot_length: beta out of [0, 90) degrees");
  return 2.0 * cb_cm * std::cos(deg_to_rad(beta_deg));
}

/// Force transmitted through the slot joint from the moment balance on the
/// input link: f = effort * OE / OB.
inline double transmitted_force(double effort_n, double oe_cm, double ob_cm) {
  if (ob_cm == 0.0) throw std::domain_error("transmitted_force: degenerate linkage (OB = 0)");
  return effort_n * oe_cm / ob_cm;
}

/// MA = OE / (2 (CB + BD) sin(gamma)). gamma = 0 is the initial-position
/// singularity (no gravity moment on the bucket link) and is an error.
inline double mechanical_advantage(const MechanismGeometry& g, double gamma_deg) {
  if (gamma_deg <= 0.0)
    throw std::domain_error("mechanical_advantage: indeterminate at gamma <= 0");
  if (gamma_deg > g.gamma_max_deg)
    throw std::invalid_argument("mechanical_advantage: gamma exceeds gamma_max");
  const double arm = g.cb_cm + g.bd_cm;
  if (arm == 0.0) throw std::domain_error("mechanical_advantage: degenerate geometry (CB + BD = 0)");
  return g.oe_cm / (2.0 * arm * std::sin(deg_to_rad(gamma_deg)));
}

/// Load liftable with the given effort; equals the composition of the
/// slot-joint force path, the beta dependence cancels.
inline double load_capacity(const MechanismGeometry& g, double effort_n, double gamma_deg) {
  return effort_n * mechanical_advantage(g, gamma_deg);
}

/// Lifting-handle height above ground at link angle alpha:
/// OE tan(a) + CB (1 + sin(a/2)) + BD.
inline double handle_height(const MechanismGeometry& g, double alpha_deg) {
  if (!(alpha_deg >= 0.0 && alpha_deg <= g.alpha_max_deg))
    throw std::invalid_argument("handle_height: alpha out of [0, alpha_max]");
  const double a = deg_to_rad(alpha_deg);
  return g.oe_cm * std::tan(a) + g.cb_cm * (1.0 + std::sin(a / 2.0)) + g.bd_cm;
}

struct Capacity {
  double cm3 = 0.0;
  bool degenerate = false;  // a length or height factor was <= 0
};

/// Container volume (OE + CB cos(a/2) - FE) * width * (CB + BD - GD).
/// A non-positive factor means there is no container; the volume clamps to 0.
inline Capacity container_capacity(const MechanismGeometry& g, double alpha_deg) {
  if (!(alpha_deg >= 0.0 && alpha_deg <= g.alpha_max_deg))
    throw std::invalid_argument("container_capacity: alpha out of [0, alpha_max]");
  const double a = deg_to_rad(alpha_deg);
  const double length = g.oe_cm + g.cb_cm * std::cos(a / 2.0) - g.fe_cm;
  const double height = g.cb_cm + g.bd_cm - g.gd_cm;
  if (length <= 0.0 || height <= 0.0) return {0.0, true};
  return {length * g.width_cm * height, false};
}

/// Swept turning width 2*sqrt(w^2 + (l + worker_depth)^2).
inline double turning_width(double equipment_length_cm, double width_cm, double worker_depth_cm) {
  if (equipment_length_cm < 0 || width_cm < 0 || worker_depth_cm < 0)
    throw std::invalid_argument("turning_width: inputs must be >= 0");
  const double reach = equipment_length_cm + worker_depth_cm;
  return 2.0 * std::sqrt(width_cm * width_cm + reach * reach);
}

/// Equipment footprint length used by the turning constraint.
inline double equipment_length(const MechanismGeometry& g, double alpha_deg) {
  return g.oe_cm + g.cb_cm * std::cos(deg_to_rad(alpha_deg) / 2.0);
}

struct ConstraintSlacks {
  double handle_height_cm = 0.0;  // bound minus achieved height
  double volume_cm3 = 0.0;        // capacity minus bound
  double turning_cm = 0.0;        // bound minus swept width
  bool feasible = false;
};

/// Evaluates the three design constraints at alpha = alpha_max (the handle's
/// top-of-stroke position). The volume tolerance scales with the equipment
/// width because that constraint is normalised by width.
inline ConstraintSlacks check_feasibility(const MechanismGeometry& g,
                                          const anthro::ConstraintBounds& b,
                                          double tolerance = 0.25) {
  g.validate();
  ConstraintSlacks s;
  s.handle_height_cm = b.max_handle_height_cm - handle_height(g, g.alpha_max_deg);
  s.volume_cm3 = container_capacity(g, g.alpha_max_deg).cm3 - b.min_container_volume_cm3;
  s.turning_cm = b.max_turning_width_cm -
                 turning_width(equipment_length(g, g.alpha_max_deg), g.width_cm, b.worker_depth_cm);
  s.feasible = s.handle_height_cm >= -tolerance && s.turning_cm >= -tolerance &&
               s.volume_cm3 >= -tolerance * g.width_cm;
  return s;
}

}  // namespace ergo::mech
