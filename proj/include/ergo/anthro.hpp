#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "ergo/csv.hpp"

namespace ergo::anthro {

enum class Population { male, female, mixed };

inline const char* to_string(Population p) {
  switch (p) {
    case Population::male: return "male";
    case Population::female: return "female";
    case Population::mixed: return "mixed";
  }
  return "?";
}

inline Population population_from_string(const std::string& s) {
  if (s == "male") return Population::male;
  if (s == "female") return Population::female;
  if (s == "mixed") return Population::mixed;
  throw std::invalid_argument("unknown population '" + s + "'");
}

struct AnthroDimension {
  std::string name;
  Population population = Population::male;
  int percentile = 50;  // one of 5 / 50 / 95
  double value_mm = 0.0;

  void validate() const {
    if (value_mm <= 0) throw std::invalid_argument("anthropometric value must be > 0: " + name);
    if (percentile != 5 && percentile != 50 && percentile != 95)
      throw std::invalid_argument("percentile must be 5, 50 or 95: " + name);
  }
};

/// Numeric design bounds in the units the constraints are written in.
struct ConstraintBounds {
  double max_handle_height_cm = 175.0;
  double min_equipment_width_cm = 50.0;
  double worker_depth_cm = 25.0;
  double max_turning_width_cm = 300.0;
  double min_container_volume_cm3 = 60000.0;
  double ground_clearance_cm = 15.0;  // GD
  double slider_gap_cm = 5.0;         // FE
  double tier_gap_cm = 20.0;

  void validate() const {
    auto pos = [](double v, const char* what) {
      if (!(v > 0)) throw std::invalid_argument(std::string("bound must be positive: ") + what);
    };
    pos(max_handle_height_cm, "max_handle_height");
    pos(min_equipment_width_cm, "min_equipment_width");
    pos(worker_depth_cm, "worker_depth");
    pos(max_turning_width_cm, "max_turning_width");
    pos(min_container_volume_cm3, "min_container_volume");
    pos(ground_clearance_cm, "ground_clearance");
    pos(slider_gap_cm, "slider_gap");
    pos(tier_gap_cm, "tier_gap");
  }
};

/// Immutable after construction; lookups are pure.
class AnthroTable {
 public:
  void add(AnthroDimension d) {
    d.validate();
    table_[key(d.name, d.percentile, d.population)] = d.value_mm;
  }

  double lookup(const std::string& name, int percentile, Population population) const {
    auto it = table_.find(key(name, percentile, population));
    if (it == table_.end())
      throw std::out_of_range("unknown anthropometric dimension (" + name + ", P" +
                              std::to_string(percentile) + ", " + to_string(population) + ")");
    return it->second;
  }

  bool contains(const std::string& name, int percentile, Population population) const {
    return table_.count(key(name, percentile, population)) > 0;
  }

  /// Indian worker data quoted from the national anthropometric survey tables.
  static AnthroTable defaults() {
    AnthroTable t;
    t.add({"vertical_grasp_reach", Population::male, 5, 1744.0});
    t.add({"bideltoid_width", Population::male, 95, 482.0});
    t.add({"chest_thickness", Population::male, 95, 254.0});
    t.add({"forearm_length", Population::male, 5, 200.0});
    return t;
  }

  /// CSV header: name,population,percentile,value_mm
  static AnthroTable from_csv(const std::string& path) {
    auto file = csv::read_file(path);
    auto c_name = csv::column(file, "name");
    auto c_pop = csv::column(file, "population");
    auto c_pct = csv::column(file, "percentile");
    auto c_val = csv::column(file, "value_mm");
    AnthroTable t;
    for (std::size_t i = 0; i < file.rows.size(); ++i) {
      const auto& r = file.rows[i];
      const std::string ctx = path + ":" + std::to_string(file.row_lines[i]);
      AnthroDimension d;
      d.name = r.at(c_name);
      d.population = population_from_string(r.at(c_pop));
      d.percentile = static_cast<int>(csv::to_double(r.at(c_pct), ctx));
      d.value_mm = csv::to_double(r.at(c_val), ctx);
      t.add(d);
    }
    return t;
  }

 private:
  static std::tuple<std::string, int, int> key(const std::string& n, int pct, Population p) {
    return {n, pct, static_cast<int>(p)};
  }
  std::map<std::tuple<std::string, int, int>, double> table_;
};

/// Converts the anthropometric table into the numeric bounds used by the
/// constraint set. Handle ceiling is the grasp reach expressed as a whole-cm
/// ceiling (1744 mm -> 175 cm); equipment width rounds the bi-deltoid width
/// up to the next 5 cm step as clothing allowance (482 mm -> 50 cm); worker
/// depth and tier gap truncate to whole cm (254 mm -> 25, 200 mm -> 20).
inline ConstraintBounds derive_bounds(const AnthroTable& table) {
  auto need = [&](const char* name, int pct, Population pop) {
    if (!table.contains(name, pct, pop))
      throw std::out_of_range(std::string("derive_bounds: table is missing (") + name + ", P" +
                              std::to_string(pct) + ", " + to_string(pop) + ")");
    return table.lookup(name, pct, pop);
  };
  const double reach_mm = need("vertical_grasp_reach", 5, Population::male);
  const double bideltoid_mm = need("bideltoid_width", 95, Population::male);
  const double chest_mm = need("chest_thickness", 95, Population::male);
  const double forearm_mm = need("forearm_length", 5, Population::male);

  ConstraintBounds b;
  b.max_handle_height_cm = std::ceil(reach_mm / 10.0);
  b.min_equipment_width_cm = 5.0 * std::ceil(bideltoid_mm / 10.0 / 5.0);
  b.worker_depth_cm = std::floor(chest_mm / 10.0);
  b.tier_gap_cm = std::floor(forearm_mm / 10.0);
  b.validate();
  return b;
}

}  // namespace ergo::anthro
