#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergo/csv.hpp"

namespace ergo::reba {

enum class LoadClass { under_5kg, kg_5_to_10, over_10kg };
enum class Coupling { good, fair, poor, unacceptable };
enum class RiskBand { negligible, low, medium, high, very_high };

inline const char* to_string(RiskBand b) {
  switch (b) {
    case RiskBand::negligible: return "negligible";
    case RiskBand::low: return "low";
    case RiskBand::medium: return "medium";
    case RiskBand::high: return "high";
    case RiskBand::very_high: return "very_high";
  }
  return "?";
}

struct ArmPosture {
  double upper_arm_flexion_deg = 0.0;  // signed, extension negative
  bool shoulder_raised = false;
  bool arm_abducted = false;
  bool arm_supported = false;  // leaning or gravity assisted
  double lower_arm_flexion_deg = 90.0;
  double wrist_deviation_deg = 0.0;  // signed flexion/extension
  bool wrist_bent_or_twisted = false;
};

struct PostureAngles {
  double trunk_flexion_deg = 0.0;  // signed, extension negative
  bool trunk_twisted = false;
  bool trunk_side_flexed = false;
  double neck_flexion_deg = 0.0;
  bool neck_twisted = false;
  bool neck_side_flexed = false;
  bool legs_bilateral = true;
  double knee_flexion_deg = 0.0;
  ArmPosture left, right;
  double angle_cap_deg = 180.0;

  void validate() const {
    auto in_cap = [&](double a, const char* what) {
      if (!(std::abs(a) <= angle_cap_deg))
        throw std::invalid_argument(std::string("posture angle out of range: ") + what);
    };
    in_cap(trunk_flexion_deg, "trunk");
    in_cap(neck_flexion_deg, "neck");
    in_cap(knee_flexion_deg, "knee");
    if (knee_flexion_deg < 0) throw std::invalid_argument("knee flexion must be >= 0");
    for (const ArmPosture* arm : {&left, &right}) {
      in_cap(arm->upper_arm_flexion_deg, "upper arm");
      in_cap(arm->lower_arm_flexion_deg, "lower arm");
      in_cap(arm->wrist_deviation_deg, "wrist");
      if (arm->lower_arm_flexion_deg < 0) throw std::invalid_argument("lower arm flexion must be >= 0");
    }
  }
};

struct ActivityFlags {
  bool static_hold = false;     // held longer than a minute
  bool repeated = false;        // more than 4x per minute
  bool rapid_change = false;    // rapid large-range posture change
  int count() const { return (static_hold ? 1 : 0) + (repeated ? 1 : 0) + (rapid_change ? 1 : 0); }
};

struct LoadCoupling {
  LoadClass load = LoadClass::under_5kg;
  bool shock_force = false;
  Coupling coupling = Coupling::good;
  ActivityFlags activity;
};

struct SideScore {
  int score_a = 1;
  int score_b = 1;
  int score_c = 1;
  int final_score = 1;
  RiskBand band = RiskBand::negligible;
};

struct RebaResult {
  SideScore left, right;
  RiskBand risk_band = RiskBand::negligible;  // band of the worse side
};

namespace tables {

// Worksheet lookup tables transcribed from the REBA publication.
// Indices are zero based: [neck-1][trunk-1][legs-1] etc.
inline constexpr std::array<std::array<std::array<int, 4>, 5>, 3> kTableA = {{
    {{{1, 2, 3, 4}, {2, 3, 4, 5}, {2, 4, 5, 6}, {3, 5, 6, 7}, {4, 6, 7, 8}}},
    {{{1, 2, 3, 4}, {3, 4, 5, 6}, {4, 5, 6, 7}, {5, 6, 7, 8}, {6, 7, 8, 9}}},
    {{{3, 3, 5, 6}, {4, 5, 6, 7}, {5, 6, 7, 8}, {6, 7, 8, 9}, {7, 8, 9, 9}}},
}};

// [lower_arm-1][upper_arm-1][wrist-1]
inline constexpr std::array<std::array<std::array<int, 3>, 6>, 2> kTableB = {{
    {{{1, 2, 2}, {1, 2, 3}, {3, 4, 5}, {4, 5, 5}, {6, 7, 8}, {7, 8, 8}}},
    {{{1, 2, 3}, {2, 3, 4}, {4, 5, 5}, {5, 6, 7}, {8, 8, 9}, {8, 9, 9}}},
}};

// [score_a-1][score_b-1]
inline constexpr std::array<std::array<int, 12>, 12> kTableC = {{
    {1, 1, 1, 2, 3, 3, 4, 5, 6, 7, 7, 7},
    {1, 2, 2, 3, 4, 4, 5, 6, 6, 7, 7, 8},
    {2, 3, 3, 3, 4, 5, 6, 7, 7, 8, 8, 8},
    {3, 4, 4, 4, 5, 6, 7, 8, 8, 9, 9, 9},
    {4, 4, 4, 5, 6, 7, 8, 8, 9, 9, 9, 9},
    {6, 6, 6, 7, 8, 8, 9, 9, 10, 10, 10, 10},
    {7, 7, 7, 8, 9, 9, 9, 10, 10, 11, 11, 11},
    {8, 8, 8, 9, 10, 10, 10, 10, 10, 11, 11, 11},
    {9, 9, 9, 10, 10, 10, 11, 11, 11, 12, 12, 12},
    {10, 10, 10, 11, 11, 11, 11, 12, 12, 12, 12, 12},
    {11, 11, 11, 11, 12, 12, 12, 12, 12, 12, 12, 12},
    {12, 12, 12, 12, 12, 12, 12, 12, 12, 12, 12, 12},
}};

}  // namespace tables

// Angle banding. Boundary angles land in the less severe band.

inline int trunk_score(const PostureAngles& p) {
  const double f = p.trunk_flexion_deg;
  int s;
  if (f == 0.0) s = 1;
  else if (f > 0.0 && f <= 20.0) s = 2;
  else if (f < 0.0 && f >= -20.0) s = 2;
  else if (f > 20.0 && f <= 60.0) s = 3;
  else if (f < -20.0) s = 3;
  else s = 4;  // flexion beyond 60
  if (p.trunk_twisted || p.trunk_side_flexed) ++s;
  return s;
}

inline int neck_score(const PostureAngles& p) {
  int s = (p.neck_flexion_deg >= 0.0 && p.neck_flexion_deg <= 20.0) ? 1 : 2;
  if (p.neck_twisted || p.neck_side_flexed) ++s;
  return s;
}

inline int legs_score(const PostureAngles& p) {
  int s = p.legs_bilateral ? 1 : 2;
  if (p.knee_flexion_deg > 60.0) s += 2;
  else if (p.knee_flexion_deg > 30.0) s += 1;
  return s;
}

inline int upper_arm_score(const ArmPosture& a) {
  const double f = a.upper_arm_flexion_deg;
  int s;
  if (std::abs(f) <= 20.0) s = 1;
  else if ((f > 20.0 && f <= 45.0) || f < -20.0) s = 2;
  else if (f > 45.0 && f <= 90.0) s = 3;
  else s = 4;
  if (a.shoulder_raised) ++s;
  if (a.arm_abducted) ++s;
  if (a.arm_supported) --s;
  return std::clamp(s, 1, 6);
}

inline int lower_arm_score(const ArmPosture& a) {
  return (a.lower_arm_flexion_deg >= 60.0 && a.lower_arm_flexion_deg <= 100.0) ? 1 : 2;
}

inline int wrist_score(const ArmPosture& a) {
  int s = std::abs(a.wrist_deviation_deg) <= 15.0 ? 1 : 2;
  if (a.wrist_bent_or_twisted) ++s;
  return s;
}

inline int load_points(const LoadCoupling& lc) {
  int s = 0;
  if (lc.load == LoadClass::kg_5_to_10) s = 1;
  else if (lc.load == LoadClass::over_10kg) s = 2;
  if (lc.shock_force) ++s;
  return s;
}

inline int coupling_points(Coupling c) {
  switch (c) {
    case Coupling::good: return 0;
    case Coupling::fair: return 1;
    case Coupling::poor: return 2;
    case Coupling::unacceptable: return 3;
  }
  return 0;
}

inline RiskBand risk_band(int final_score) {
  if (final_score < 1 || final_score > 15)
    throw std::invalid_argument("risk_band: final score out of [1, 15]");
  if (final_score == 1) return RiskBand::negligible;
  if (final_score <= 3) return RiskBand::low;
  if (final_score <= 7) return RiskBand::medium;
  if (final_score <= 10) return RiskBand::high;
  return RiskBand::very_high;
}

/// Full worksheet walk for one posture, each side scored independently with
/// the shared trunk/neck/legs group.
inline RebaResult score(const PostureAngles& posture, const LoadCoupling& lc) {
  posture.validate();
  const int trunk = trunk_score(posture);
  const int neck = neck_score(posture);
  const int legs = legs_score(posture);
  const int a = tables::kTableA[neck - 1][trunk - 1][legs - 1] + load_points(lc);

  auto side = [&](const ArmPosture& arm) {
    SideScore s;
    s.score_a = a;
    const int ua = upper_arm_score(arm);
    const int la = lower_arm_score(arm);
    const int wr = wrist_score(arm);
    s.score_b = tables::kTableB[la - 1][ua - 1][wr - 1] + coupling_points(lc.coupling);
    s.score_c = tables::kTableC[s.score_a - 1][s.score_b - 1];
    s.final_score = s.score_c + lc.activity.count();
    s.band = risk_band(s.final_score);
    return s;
  };

  RebaResult r;
  r.left = side(posture.left);
  r.right = side(posture.right);
  r.risk_band = risk_band(std::max(r.left.final_score, r.right.final_score));
  return r;
}

struct BatchRow {
  std::size_t line = 0;
  bool ok = false;
  std::string error;
  RebaResult result;
};

namespace detail {

inline bool parse_flag(const std::string& s, const std::string& ctx) {
  if (s == "0" || s == "false" || s == "no") return false;
  if (s == "1" || s == "true" || s == "yes") return true;
  throw std::runtime_error("bad flag value '" + s + "' in " + ctx);
}

inline LoadClass parse_load(const std::string& s, const std::string& ctx) {
  if (s == "under5") return LoadClass::under_5kg;
  if (s == "5to10") return LoadClass::kg_5_to_10;
  if (s == "over10") return LoadClass::over_10kg;
  throw std::runtime_error("bad load_class '" + s + "' in " + ctx);
}

inline Coupling parse_coupling(const std::string& s, const std::string& ctx) {
  if (s == "good") return Coupling::good;
  if (s == "fair") return Coupling::fair;
  if (s == "poor") return Coupling::poor;
  if (s == "unacceptable") return Coupling::unacceptable;
  throw std::runtime_error("bad coupling '" + s + "' in " + ctx);
}

}  // namespace detail

/// Scores one CSV row per posture. Malformed rows are reported with their
/// line number and do not stop the batch.
inline std::vector<BatchRow> batch_score(const std::string& path) {
  auto file = csv::read_file(path);
  auto col = [&](const char* name) { return csv::column(file, name); };
  const auto c_trunk = col("trunk_flexion_deg"), c_ttw = col("trunk_twisted"),
             c_tsf = col("trunk_side_flexed"), c_neck = col("neck_flexion_deg"),
             c_ntw = col("neck_twisted"), c_nsf = col("neck_side_flexed"),
             c_bilat = col("legs_bilateral"), c_knee = col("knee_flexion_deg");
  struct ArmCols {
    std::size_t ua, raised, abducted, supported, la, wrist, bent;
  };
  auto arm_cols = [&](const std::string& prefix) {
    return ArmCols{col((prefix + "_upper_arm_flexion_deg").c_str()),
                   col((prefix + "_shoulder_raised").c_str()),
                   col((prefix + "_arm_abducted").c_str()),
                   col((prefix + "_arm_supported").c_str()),
                   col((prefix + "_lower_arm_flexion_deg").c_str()),
                   col((prefix + "_wrist_deviation_deg").c_str()),
                   col((prefix + "_wrist_bent").c_str())};
  };
  const ArmCols lcols = arm_cols("left"), rcols = arm_cols("right");
  const auto c_load = col("load_class"), c_shock = col("shock_force"), c_coup = col("coupling"),
             c_hold = col("static_hold"), c_rep = col("repeated_actions"),
             c_rapid = col("rapid_change");

  std::vector<BatchRow> out;
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    const auto& r = file.rows[i];
    BatchRow row;
    row.line = file.row_lines[i];
    const std::string ctx = path + ":" + std::to_string(row.line);
    try {
      PostureAngles p;
      p.trunk_flexion_deg = csv::to_double(r.at(c_trunk), ctx);
      p.trunk_twisted = detail::parse_flag(r.at(c_ttw), ctx);
      p.trunk_side_flexed = detail::parse_flag(r.at(c_tsf), ctx);
      p.neck_flexion_deg = csv::to_double(r.at(c_neck), ctx);
      p.neck_twisted = detail::parse_flag(r.at(c_ntw), ctx);
      p.neck_side_flexed = detail::parse_flag(r.at(c_nsf), ctx);
      p.legs_bilateral = detail::parse_flag(r.at(c_bilat), ctx);
      p.knee_flexion_deg = csv::to_double(r.at(c_knee), ctx);
      auto read_arm = [&](const ArmCols& c) {
        ArmPosture a;
        a.upper_arm_flexion_deg = csv::to_double(r.at(c.ua), ctx);
        a.shoulder_raised = detail::parse_flag(r.at(c.raised), ctx);
        a.arm_abducted = detail::parse_flag(r.at(c.abducted), ctx);
        a.arm_supported = detail::parse_flag(r.at(c.supported), ctx);
        a.lower_arm_flexion_deg = csv::to_double(r.at(c.la), ctx);
        a.wrist_deviation_deg = csv::to_double(r.at(c.wrist), ctx);
        a.wrist_bent_or_twisted = detail::parse_flag(r.at(c.bent), ctx);
        return a;
      };
      p.left = read_arm(lcols);
      p.right = read_arm(rcols);
      LoadCoupling lc;
      lc.load = detail::parse_load(r.at(c_load), ctx);
      lc.shock_force = detail::parse_flag(r.at(c_shock), ctx);
      lc.coupling = detail::parse_coupling(r.at(c_coup), ctx);
      lc.activity.static_hold = detail::parse_flag(r.at(c_hold), ctx);
      lc.activity.repeated = detail::parse_flag(r.at(c_rep), ctx);
      lc.activity.rapid_change = detail::parse_flag(r.at(c_rapid), ctx);
      row.result = score(p, lc);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace ergo::reba
