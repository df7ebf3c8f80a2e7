#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergo/csv.hpp"

namespace ergo::handle {

enum class Task { lift, push, pull };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::lift: return "lift";
    case Task::push: return "push";
    case Task::pull: return "pull";
  }
  return "?";
}

inline Task task_from_string(const std::string& s) {
  if (s == "lift") return Task::lift;
  if (s == "push") return Task::push;
  if (s == "pull") return Task::pull;
  throw std::invalid_argument("unknown task '" + s + "'");
}

/// Back-compression-force samples over handle height for one task, as
/// produced by an external biomechanics tool.
struct BcfCurve {
  Task task = Task::lift;
  std::string population_tag;
  std::vector<std::pair<double, double>> samples;  // (height_cm, bcf_n), height ascending

  void validate() const {
    if (samples.size() < 3) throw std::invalid_argument("BCF curve needs at least 3 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!(samples[i].second > 0)) throw std::invalid_argument("BCF values must be > 0");
      if (i > 0 && !(samples[i].first > samples[i - 1].first))
        throw std::invalid_argument("BCF curve heights must be strictly increasing");
    }
  }

  double min_height() const { return samples.front().first; }
  double max_height() const { return samples.back().first; }

  /// Linear interpolation inside the sampled range; extrapolation is refused.
  double value_at(double h) const {
    if (h < min_height() || h > max_height())
      throw std::domain_error("BCF curve: height outside sampled range");
    auto it = std::lower_bound(samples.begin(), samples.end(), h,
                               [](const auto& s, double x) { return s.first < x; });
    if (it->first == h) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (h - lo.first) / (hi.first - lo.first);
    return lo.second + w * (hi.second - lo.second);
  }

  double argmin_height() const {
    auto it = std::min_element(samples.begin(), samples.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
    return it->first;
  }
};

struct LiftHeight {
  double height_cm = 0.0;
  bool spike_found = false;
};

/// Lowest sampled height whose next step down raises BCF by more than
/// spike_ratio relative. No spike -> lowest sampled height, flagged.
inline LiftHeight min_lift_height(const BcfCurve& curve, double spike_ratio = 0.15) {
  if (curve.task != Task::lift)
    throw std::invalid_argument("min_lift_height expects a lift-task curve");
  curve.validate();
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    const double here = curve.samples[i].second;
    const double below = curve.samples[i - 1].second;
    if (below > here * (1.0 + spike_ratio)) return {curve.samples[i].first, true};
  }
  return {curve.min_height(), false};
}

/// Handle positions h_top, h_top - gap, ... down to h_min.
inline std::vector<double> tier_layout(double h_top_cm, double h_min_cm, double tier_gap_cm = 20.0) {
  if (!(h_top_cm > h_min_cm)) throw std::invalid_argument("tier_layout: inverted height range");
  if (!(tier_gap_cm > 0)) throw std::invalid_argument("tier_layout: tier gap must be > 0");
  std::vector<double> tiers;
  for (double h = h_top_cm; h >= h_min_cm; h -= tier_gap_cm) tiers.push_back(h);
  return tiers;
}

struct HandleSelection {
  double height_cm = 0.0;
  double rank_push = 0.0;  // percentile goodness rank within the push curve
  double rank_pull = 0.0;
  std::string rationale;
};

namespace detail {

/// Common height grid: the curves' own grid when equal, otherwise the union
/// of sampled heights restricted to the overlapping range.
inline std::vector<double> common_grid(const BcfCurve& a, const BcfCurve& b) {
  const double lo = std::max(a.min_height(), b.min_height());
  const double hi = std::min(a.max_height(), b.max_height());
  if (!(lo <= hi)) throw std::invalid_argument("maneuver_height: curves have disjoint height ranges");
  std::vector<double> g;
  for (const auto& s : a.samples)
    if (s.first >= lo && s.first <= hi) g.push_back(s.first);
  for (const auto& s : b.samples)
    if (s.first >= lo && s.first <= hi) g.push_back(s.first);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.size() < 3) throw std::invalid_argument("maneuver_height: overlap has fewer than 3 heights");
  return g;
}

/// Rank of grid point i: percent of grid heights with strictly higher value.
inline double goodness_rank(const std::vector<double>& values, std::size_t i) {
  std::size_t higher = 0;
  for (double v : values)
    if (v > values[i]) ++higher;
  return 100.0 * static_cast<double>(higher) / static_cast<double>(values.size());
}

}  // namespace detail

/// Maximin compromise between the push and pull curves: pick the height whose
/// worse goodness rank is best. Ranks are order statistics over the common
/// grid, so any strictly monotone rescaling of the BCF values leaves the
/// selection unchanged. Ties resolve toward the midpoint of the two curves'
/// minimum-BCF heights, then toward the lower height.
inline HandleSelection maneuver_height(const BcfCurve& push, const BcfCurve& pull) {
  if (push.task != Task::push) throw std::invalid_argument("maneuver_height: first curve must be push");
  if (pull.task != Task::pull) throw std::invalid_argument("maneuver_height: second curve must be pull");
  push.validate();
  pull.validate();

  const auto grid = detail::common_grid(push, pull);
  std::vector<double> pv(grid.size()), qv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    pv[i] = push.value_at(grid[i]);
    qv[i] = pull.value_at(grid[i]);
  }

  const double tie_target = 0.5 * (push.argmin_height() + pull.argmin_height());
  std::size_t best = 0;
  double best_min_rank = -1.0, best_rp = 0.0, best_rq = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rp = detail::goodness_rank(pv, i);
    const double rq = detail::goodness_rank(qv, i);
    const double m = std::min(rp, rq);
    bool take = m > best_min_rank;
    if (m == best_min_rank) {
      const double d_new = std::abs(grid[i] - tie_target);
      const double d_old = std::abs(grid[best] - tie_target);
      take = d_new < d_old || (d_new == d_old && grid[i] < grid[best]);
    }
    if (take) {
      best = i;
      best_min_rank = m;
      best_rp = rp;
      best_rq = rq;
    }
  }

  HandleSelection sel;
  sel.height_cm = grid[best];
  sel.rank_push = best_rp;
  sel.rank_pull = best_rq;
  std::ostringstream why;
  why << "maximin goodness rank " << best_min_rank << " over " << grid.size() << " grid heights";
  sel.rationale = why.str();
  return sel;
}

/// CSV header: height_cm,bcf_n with an optional metadata comment line
/// "# task=push population=95th-male".
inline BcfCurve load_bcf_csv(const std::string& path) {
  auto file = csv::read_file(path);
  auto c_h = csv::column(file, "height_cm");
  auto c_b = csv::column(file, "bcf_n");
  BcfCurve curve;
  for (const auto& comment : file.comments) {
    std::istringstream ss(comment);
    std::string tok;
    while (ss >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
      if (k == "task") curve.task = task_from_string(v);
      if (k == "population") curve.population_tag = v;
    }
  }
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    const auto& r = file.rows[i];
    const std::string ctx = path + ":" + std::to_string(file.row_lines[i]);
    curve.samples.emplace_back(csv::to_double(r.at(c_h), ctx), csv::to_double(r.at(c_b), ctx));
  }
  std::sort(curve.samples.begin(), curve.samples.end());
  curve.validate();
  return curve;
}

}  // namespace ergo::handle
