#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ergo/scooping.hpp"

using Catch::Approx;
using namespace ergo::scoop;

namespace {
MaterialSpec gravel() { return MaterialSpec::measured("gravel", 2400.0, 0.8); }
}  // namespace

TEST_CASE("gravel penetration depth") {
  const ScoopConditions cond;
  CHECK(penetration_depth(gravel(), cond) == Approx(0.0632691).margin(5e-5));
}

TEST_CASE("no kinetic energy means no penetration") {
  ScoopConditions cond;
  cond.final_velocity_ms = cond.approach_velocity_ms;
  CHECK(penetration_depth(gravel(), cond) == 0.0);
  CHECK(scoop_force(cond, 0.05) == 0.0);
}

TEST_CASE("depth scales as the inverse square root of rho*mu") {
  const ScoopConditions cond;
  MaterialSpec dense = gravel();
  dense.density_kgm3.reset();
  dense.friction_mu.reset();
  dense.effective_rho_mu *= 2.0;
  CHECK(penetration_depth(dense, cond) ==
        Approx(penetration_depth(gravel(), cond) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("scoop force") {
  const ScoopConditions cond;
  CHECK(scoop_force(cond, 0.063269) == Approx(75.08).margin(0.01));
  CHECK(scoop_force(cond, 0.05) == Approx(2.0 * scoop_force(cond, 0.10)).epsilon(1e-12));
  CHECK_THROWS_AS(scoop_force(cond, 0.0), std::domain_error);
}

TEST_CASE("resistance force") {
  const ScoopConditions cond;
  CHECK(resistance_force(gravel(), cond, 0.063269) == Approx(75.07).margin(0.01));
  CHECK(resistance_force(gravel(), cond, 0.0) == 0.0);
  CHECK(resistance_force(gravel(), cond, 0.08) ==
        Approx(2.0 * resistance_force(gravel(), cond, 0.04)).epsilon(1e-12));
}

TEST_CASE("force balance defines the penetration depth") {
  const ScoopConditions cond;
  for (double eff : {500.0, 953.0845, 1920.0, 296.1372}) {
    MaterialSpec m;
    m.name = "m";
    m.effective_rho_mu = eff;
    const double s = penetration_depth(m, cond);
    const double push = scoop_force(cond, s);
    const double resist = resistance_force(m, cond, s);
    REQUIRE(std::abs(push - resist) <= 1e-6 * resist);
    // implied constant deceleration balances the applied force
    const double accel = (cond.final_velocity_ms * cond.final_velocity_ms -
                          cond.approach_velocity_ms * cond.approach_velocity_ms) /
                         (2.0 * s);
    REQUIRE(cond.kerb_mass_kg * accel == Approx(-push).epsilon(1e-12));
  }
}

TEST_CASE("calibration inverts the depth relation") {
  const ScoopConditions cond;
  CHECK(calibrate_material("mud", 0.0898, cond).effective_rho_mu == Approx(953.08).margin(0.05));
  CHECK(calibrate_material("sand", 0.0894, cond).effective_rho_mu == Approx(961.63).margin(0.05));
  CHECK(calibrate_material("domestic_waste", 0.1611, cond).effective_rho_mu ==
        Approx(296.14).margin(0.05));
  CHECK_THROWS_AS(calibrate_material("x", 0.0, cond), std::domain_error);

  std::mt19937 rng(23);
  std::uniform_real_distribution<double> depth(0.005, 0.5);
  for (int i = 0; i < 200; ++i) {
    const double d = depth(rng);
    const auto m = calibrate_material("rt", d, cond);
    CHECK(m.calibrated);
    REQUIRE(penetration_depth(m, cond) == Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("penetration depth is monotone in rho*mu and in approach speed") {
  const ScoopConditions base;
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> eff(100.0, 5000.0), du(0.05, 2.0);
  for (int i = 0; i < 200; ++i) {
    MaterialSpec a, b;
    a.name = b.name = "m";
    a.effective_rho_mu = eff(rng);
    b.effective_rho_mu = a.effective_rho_mu + eff(rng);
    CHECK(penetration_depth(b, base) < penetration_depth(a, base));
    ScoopConditions faster = base;
    faster.approach_velocity_ms += du(rng);
    CHECK(penetration_depth(a, faster) > penetration_depth(a, base));
  }
}

TEST_CASE("plate length floors the shortest depth") {
  const ScoopConditions cond;
  const auto db = load_materials_csv(std::string(ERGO_DATA_DIR) + "/materials.csv");
  REQUIRE(db.size() == 4);
  CHECK_FALSE(db[0].calibrated);
  CHECK(db[1].calibrated);

  const auto plate = base_plate_length(db, cond);
  CHECK(plate.length_cm == 6);
  CHECK_FALSE(plate.degenerate);

  const std::vector<MaterialSpec> only_gravel{gravel()};
  CHECK(base_plate_length(only_gravel, cond).length_cm == 6);

  MaterialSpec rock;
  rock.name = "rock";
  rock.effective_rho_mu = 1e9;
  const std::vector<MaterialSpec> hard{rock};
  const auto degen = base_plate_length(hard, cond);
  CHECK(degen.length_cm == 0);
  CHECK(degen.degenerate);

  CHECK_THROWS_AS(base_plate_length(std::span<const MaterialSpec>{}, cond),
                  std::invalid_argument);
}

TEST_CASE("shipped database reproduces the reported depths") {
  const ScoopConditions cond;
  const auto db = load_materials_csv(std::string(ERGO_DATA_DIR) + "/materials.csv");
  const double expected[] = {6.32, 8.98, 8.94, 16.11};
  for (std::size_t i = 0; i < db.size(); ++i)
    CHECK(penetration_depth(db[i], cond) * 100.0 == Approx(expected[i]).margin(0.02));
}

TEST_CASE("material and condition invariants") {
  MaterialSpec bad;
  bad.name = "bad";
  bad.effective_rho_mu = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  MaterialSpec mismatched;
  mismatched.name = "m";
  mismatched.density_kgm3 = 1000.0;
  mismatched.friction_mu = 0.5;
  mismatched.effective_rho_mu = 123.0;
  CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);

  ScoopConditions cond;
  cond.final_velocity_ms = 1.0;  // exceeds approach velocity
  CHECK_THROWS_AS(cond.validate(), std::invalid_argument);
}
