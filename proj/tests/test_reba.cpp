#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "ergo/reba.hpp"

using namespace ergo::reba;

namespace {

PostureAngles neutral() {
  PostureAngles p;
  p.neck_flexion_deg = 10;
  p.left.upper_arm_flexion_deg = p.right.upper_arm_flexion_deg = 10;
  p.left.lower_arm_flexion_deg = p.right.lower_arm_flexion_deg = 80;
  p.left.wrist_deviation_deg = p.right.wrist_deviation_deg = 5;
  return p;
}

PostureAngles worst() {
  PostureAngles p;
  p.trunk_flexion_deg = 70;
  p.trunk_twisted = p.trunk_side_flexed = true;
  p.neck_flexion_deg = 30;
  p.neck_twisted = true;
  p.legs_bilateral = false;
  p.knee_flexion_deg = 70;
  for (ArmPosture* arm : {&p.left, &p.right}) {
    arm->upper_arm_flexion_deg = 100;
    arm->shoulder_raised = true;
    arm->arm_abducted = true;
    arm->lower_arm_flexion_deg = 30;
    arm->wrist_deviation_deg = 20;
    arm->wrist_bent_or_twisted = true;
  }
  return p;
}

LoadCoupling worst_load() {
  LoadCoupling lc;
  lc.load = LoadClass::over_10kg;
  lc.shock_force = true;
  lc.coupling = Coupling::unacceptable;
  lc.activity = {true, true, true};
  return lc;
}

}  // namespace

TEST_CASE("neutral posture scores one") {
  const auto r = score(neutral(), LoadCoupling{});
  CHECK(r.left.score_a == 1);
  CHECK(r.left.score_b == 1);
  CHECK(r.left.score_c == 1);
  CHECK(r.left.final_score == 1);
  CHECK(r.right.final_score == 1);
  CHECK(r.risk_band == RiskBand::negligible);
}

TEST_CASE("maximal posture scores fifteen") {
  const auto r = score(worst(), worst_load());
  CHECK(r.left.score_a == 12);
  CHECK(r.left.score_b == 12);
  CHECK(r.left.score_c == 12);
  CHECK(r.left.final_score == 15);
  CHECK(r.right.final_score == 15);
  CHECK(r.risk_band == RiskBand::very_high);
}

// Oracle: manual worksheet walk, frozen before the engine existed.
// trunk 30 flexed + twisted -> 3+1 = 4; neck 25 -> 2; legs unilateral,
// knee 45 -> 2+1 = 3; table A[2][4][3] = 7, load 5-10 kg -> +1 => A = 8.
// upper arm 50 abducted -> 3+1 = 4; lower arm 110 -> 2; wrist 20 twisted
// -> 2+1 = 3; table B[2][4][3] = 7, fair coupling -> +1 => B = 8.
// table C[8][8] = 10, static hold +1 => final 11, very high.
TEST_CASE("mid-range posture matches the manual lookup") {
  PostureAngles p;
  p.trunk_flexion_deg = 30;
  p.trunk_twisted = true;
  p.neck_flexion_deg = 25;
  p.legs_bilateral = false;
  p.knee_flexion_deg = 45;
  for (ArmPosture* arm : {&p.left, &p.right}) {
    arm->upper_arm_flexion_deg = 50;
    arm->arm_abducted = true;
    arm->lower_arm_flexion_deg = 110;
    arm->wrist_deviation_deg = 20;
    arm->wrist_bent_or_twisted = true;
  }
  LoadCoupling lc;
  lc.load = LoadClass::kg_5_to_10;
  lc.coupling = Coupling::fair;
  lc.activity.static_hold = true;

  const auto r = score(p, lc);
  CHECK(r.left.score_a == 8);
  CHECK(r.left.score_b == 8);
  CHECK(r.left.score_c == 10);
  CHECK(r.left.final_score == 11);
  CHECK(r.right.final_score == 11);
  CHECK(r.risk_band == RiskBand::very_high);
}

// Oracle: manual worksheet walk for an asymmetric posture.
// trunk -10 extension -> 2; neck -5 extension, side flexed -> 2+1 = 3;
// legs bilateral, knee 70 -> 1+2 = 3; table A[3][2][3] = 6, load >10 kg
// -> +2 => A = 8.
// left arm: upper -30 raised supported -> 2+1-1 = 2; lower 45 -> 2;
// wrist -10 twisted -> 1+1 = 2; table B[2][2][2] = 3, poor coupling +2
// => B = 5; C[8][5] = 10, repeated + rapid +2 => final 12.
// right arm: upper 10 -> 1; lower 80 -> 1; wrist 0 -> 1; B = 1+2 = 3;
// C[8][3] = 8, +2 => final 10.
TEST_CASE("asymmetric posture matches the manual lookup per side") {
  PostureAngles p;
  p.trunk_flexion_deg = -10;
  p.neck_flexion_deg = -5;
  p.neck_side_flexed = true;
  p.knee_flexion_deg = 70;
  p.left.upper_arm_flexion_deg = -30;
  p.left.shoulder_raised = true;
  p.left.arm_supported = true;
  p.left.lower_arm_flexion_deg = 45;
  p.left.wrist_deviation_deg = -10;
  p.left.wrist_bent_or_twisted = true;
  p.right.upper_arm_flexion_deg = 10;
  p.right.lower_arm_flexion_deg = 80;
  LoadCoupling lc;
  lc.load = LoadClass::over_10kg;
  lc.coupling = Coupling::poor;
  lc.activity.repeated = true;
  lc.activity.rapid_change = true;

  const auto r = score(p, lc);
  CHECK(r.left.score_a == 8);
  CHECK(r.left.score_b == 5);
  CHECK(r.left.final_score == 12);
  CHECK(r.right.score_b == 3);
  CHECK(r.right.score_c == 8);
  CHECK(r.right.final_score == 10);
  CHECK(r.left.band == RiskBand::very_high);
  CHECK(r.right.band == RiskBand::high);
  CHECK(r.risk_band == RiskBand::very_high);
}

TEST_CASE("risk bands") {
  CHECK(risk_band(1) == RiskBand::negligible);
  CHECK(risk_band(2) == RiskBand::low);
  CHECK(risk_band(3) == RiskBand::low);
  CHECK(risk_band(4) == RiskBand::medium);
  CHECK(risk_band(7) == RiskBand::medium);
  CHECK(risk_band(8) == RiskBand::high);
  CHECK(risk_band(9) == RiskBand::high);
  CHECK(risk_band(10) == RiskBand::high);
  CHECK(risk_band(11) == RiskBand::very_high);
  CHECK(risk_band(15) == RiskBand::very_high);
  CHECK_THROWS_AS(risk_band(0), std::invalid_argument);
  CHECK_THROWS_AS(risk_band(16), std::invalid_argument);
}

TEST_CASE("boundary angles fall into the less severe band") {
  PostureAngles p = neutral();
  p.trunk_flexion_deg = 20;
  CHECK(trunk_score(p) == 2);
  p.trunk_flexion_deg = 20.5;
  CHECK(trunk_score(p) == 3);
  p.trunk_flexion_deg = 60;
  CHECK(trunk_score(p) == 3);
  p.trunk_flexion_deg = 61;
  CHECK(trunk_score(p) == 4);

  p.neck_flexion_deg = 20;
  CHECK(neck_score(p) == 1);
  p.neck_flexion_deg = 21;
  CHECK(neck_score(p) == 2);
  p.neck_flexion_deg = -1;
  CHECK(neck_score(p) == 2);

  p.knee_flexion_deg = 30;
  CHECK(legs_score(p) == 1);
  p.knee_flexion_deg = 31;
  CHECK(legs_score(p) == 2);
  p.knee_flexion_deg = 60;
  CHECK(legs_score(p) == 2);
  p.knee_flexion_deg = 61;
  CHECK(legs_score(p) == 3);

  ArmPosture a;
  a.upper_arm_flexion_deg = 20;
  CHECK(upper_arm_score(a) == 1);
  a.upper_arm_flexion_deg = 45;
  CHECK(upper_arm_score(a) == 2);
  a.upper_arm_flexion_deg = 90;
  CHECK(upper_arm_score(a) == 3);
  a.upper_arm_flexion_deg = 91;
  CHECK(upper_arm_score(a) == 4);

  a.lower_arm_flexion_deg = 60;
  CHECK(lower_arm_score(a) == 1);
  a.lower_arm_flexion_deg = 100;
  CHECK(lower_arm_score(a) == 1);
  a.lower_arm_flexion_deg = 101;
  CHECK(lower_arm_score(a) == 2);
  a.lower_arm_flexion_deg = 59;
  CHECK(lower_arm_score(a) == 2);

  a.wrist_deviation_deg = 15;
  CHECK(wrist_score(a) == 1);
  a.wrist_deviation_deg = -16;
  CHECK(wrist_score(a) == 2);
}

TEST_CASE("lookup tables stay inside their published ranges and are monotone") {
  for (int neck = 1; neck <= 3; ++neck)
    for (int trunk = 1; trunk <= 5; ++trunk)
      for (int legs = 1; legs <= 4; ++legs) {
        const int v = tables::kTableA[neck - 1][trunk - 1][legs - 1];
        CHECK(v >= 1);
        CHECK(v <= 9);
        if (neck > 1) CHECK(v >= tables::kTableA[neck - 2][trunk - 1][legs - 1]);
        if (trunk > 1) CHECK(v >= tables::kTableA[neck - 1][trunk - 2][legs - 1]);
        if (legs > 1) CHECK(v >= tables::kTableA[neck - 1][trunk - 1][legs - 2]);
      }
  for (int la = 1; la <= 2; ++la)
    for (int ua = 1; ua <= 6; ++ua)
      for (int wr = 1; wr <= 3; ++wr) {
        const int v = tables::kTableB[la - 1][ua - 1][wr - 1];
        CHECK(v >= 1);
        CHECK(v <= 9);
        if (la > 1) CHECK(v >= tables::kTableB[la - 2][ua - 1][wr - 1]);
        if (ua > 1) CHECK(v >= tables::kTableB[la - 1][ua - 2][wr - 1]);
        if (wr > 1) CHECK(v >= tables::kTableB[la - 1][ua - 1][wr - 2]);
      }
  for (int a = 1; a <= 12; ++a)
    for (int b = 1; b <= 12; ++b) {
      const int v = tables::kTableC[a - 1][b - 1];
      CHECK(v >= 1);
      CHECK(v <= 12);
      if (a > 1) CHECK(v >= tables::kTableC[a - 2][b - 1]);
      if (b > 1) CHECK(v >= tables::kTableC[a - 1][b - 2]);
    }
}

namespace {

// Every single-field change that cannot make a posture safer. The arm
// support flag is mitigating, so its worsening direction is clearing it.
std::vector<std::pair<PostureAngles, LoadCoupling>> worsenings(const PostureAngles& p,
                                                               const LoadCoupling& lc) {
  std::vector<std::pair<PostureAngles, LoadCoupling>> out;
  auto add = [&](auto mutate) {
    PostureAngles q = p;
    LoadCoupling m = lc;
    mutate(q, m);
    out.emplace_back(q, m);
  };
  add([](PostureAngles& q, LoadCoupling&) {
    q.trunk_flexion_deg = q.trunk_flexion_deg >= 0 ? q.trunk_flexion_deg + 25 : q.trunk_flexion_deg - 15;
  });
  add([](PostureAngles& q, LoadCoupling&) { q.trunk_twisted = true; });
  add([](PostureAngles& q, LoadCoupling&) { q.trunk_side_flexed = true; });
  add([](PostureAngles& q, LoadCoupling&) {
    q.neck_flexion_deg = q.neck_flexion_deg >= 0 ? q.neck_flexion_deg + 25 : q.neck_flexion_deg - 10;
  });
  add([](PostureAngles& q, LoadCoupling&) { q.neck_twisted = true; });
  add([](PostureAngles& q, LoadCoupling&) { q.neck_side_flexed = true; });
  add([](PostureAngles& q, LoadCoupling&) { q.legs_bilateral = false; });
  add([](PostureAngles& q, LoadCoupling&) { q.knee_flexion_deg += 31; });
  for (int side = 0; side < 2; ++side) {
    auto arm_of = [side](PostureAngles& q) -> ArmPosture& { return side ? q.right : q.left; };
    add([&](PostureAngles& q, LoadCoupling&) {
      auto& a = arm_of(q);
      a.upper_arm_flexion_deg = a.upper_arm_flexion_deg >= 0 ? a.upper_arm_flexion_deg + 30
                                                             : a.upper_arm_flexion_deg - 15;
    });
    add([&](PostureAngles& q, LoadCoupling&) { arm_of(q).shoulder_raised = true; });
    add([&](PostureAngles& q, LoadCoupling&) { arm_of(q).arm_abducted = true; });
    add([&](PostureAngles& q, LoadCoupling&) { arm_of(q).arm_supported = false; });
    add([&](PostureAngles& q, LoadCoupling&) { arm_of(q).lower_arm_flexion_deg = 130; });
    add([&](PostureAngles& q, LoadCoupling&) {
      auto& a = arm_of(q);
      a.wrist_deviation_deg = a.wrist_deviation_deg >= 0 ? a.wrist_deviation_deg + 20
                                                         : a.wrist_deviation_deg - 20;
    });
    add([&](PostureAngles& q, LoadCoupling&) { arm_of(q).wrist_bent_or_twisted = true; });
  }
  add([](PostureAngles&, LoadCoupling& m) {
    m.load = m.load == LoadClass::under_5kg ? LoadClass::kg_5_to_10 : LoadClass::over_10kg;
  });
  add([](PostureAngles&, LoadCoupling& m) { m.shock_force = true; });
  add([](PostureAngles&, LoadCoupling& m) {
    m.coupling = m.coupling == Coupling::good
                     ? Coupling::fair
                     : (m.coupling == Coupling::fair ? Coupling::poor : Coupling::unacceptable);
  });
  add([](PostureAngles&, LoadCoupling& m) { m.activity.static_hold = true; });
  add([](PostureAngles&, LoadCoupling& m) { m.activity.repeated = true; });
  add([](PostureAngles&, LoadCoupling& m) { m.activity.rapid_change = true; });
  return out;
}

PostureAngles random_posture(std::mt19937& rng) {
  std::uniform_real_distribution<double> trunk(-40, 80), neck(-20, 40), knee(0, 90), ua(-50, 120),
      la(0, 150), wrist(-40, 40);
  std::bernoulli_distribution flag(0.35);
  PostureAngles p;
  p.trunk_flexion_deg = trunk(rng);
  p.trunk_twisted = flag(rng);
  p.trunk_side_flexed = flag(rng);
  p.neck_flexion_deg = neck(rng);
  p.neck_twisted = flag(rng);
  p.neck_side_flexed = flag(rng);
  p.legs_bilateral = flag(rng);
  p.knee_flexion_deg = knee(rng);
  for (ArmPosture* arm : {&p.left, &p.right}) {
    arm->upper_arm_flexion_deg = ua(rng);
    arm->shoulder_raised = flag(rng);
    arm->arm_abducted = flag(rng);
    arm->arm_supported = flag(rng);
    arm->lower_arm_flexion_deg = la(rng);
    arm->wrist_deviation_deg = wrist(rng);
    arm->wrist_bent_or_twisted = flag(rng);
  }
  return p;
}

LoadCoupling random_load(std::mt19937& rng) {
  std::uniform_int_distribution<int> three(0, 2), four(0, 3);
  std::bernoulli_distribution flag(0.3);
  LoadCoupling lc;
  lc.load = static_cast<LoadClass>(three(rng));
  lc.shock_force = flag(rng);
  lc.coupling = static_cast<Coupling>(four(rng));
  lc.activity = {flag(rng), flag(rng), flag(rng)};
  return lc;
}

}  // namespace

TEST_CASE("worsening any single input never lowers a score") {
  std::mt19937 rng(1213);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_posture(rng);
    const auto lc = random_load(rng);
    const auto base = score(p, lc);
    for (const auto& [wp, wlc] : worsenings(p, lc)) {
      const auto worse = score(wp, wlc);
      const std::pair<SideScore, SideScore> sides[] = {{base.left, worse.left},
                                                       {base.right, worse.right}};
      for (const auto& [was, now] : sides) {
        REQUIRE(now.score_a >= was.score_a);
        REQUIRE(now.score_b >= was.score_b);
        REQUIRE(now.score_c >= was.score_c);
        REQUIRE(now.final_score >= was.final_score);
      }
    }
  }
}

TEST_CASE("left arm inputs never touch the right side") {
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    auto p = random_posture(rng);
    const auto lc = random_load(rng);
    const auto before = score(p, lc);
    p.left = random_posture(rng).left;
    const auto after = score(p, lc);
    REQUIRE(after.right.score_b == before.right.score_b);
    REQUIRE(after.right.final_score == before.right.final_score);
  }
}

TEST_CASE("scoring is deterministic") {
  std::mt19937 rng(99);
  const auto p = random_posture(rng);
  const auto lc = random_load(rng);
  const auto a = score(p, lc);
  const auto b = score(p, lc);
  CHECK(a.left.final_score == b.left.final_score);
  CHECK(a.right.final_score == b.right.final_score);
  CHECK(a.risk_band == b.risk_band);
}

TEST_CASE("angle caps are enforced") {
  PostureAngles p = neutral();
  p.trunk_flexion_deg = 200;
  CHECK_THROWS_AS(score(p, LoadCoupling{}), std::invalid_argument);
  p = neutral();
  p.knee_flexion_deg = -5;
  CHECK_THROWS_AS(score(p, LoadCoupling{}), std::invalid_argument);
}

TEST_CASE("batch scoring of the shipped fixture") {
  const auto rows = batch_score(std::string(ERGO_DATA_DIR) + "/postures.csv");
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) REQUIRE(r.ok);
  CHECK(rows[0].result.left.final_score == 1);
  CHECK(rows[1].result.left.final_score == 11);
  CHECK(rows[1].result.right.final_score == 11);
  CHECK(rows[2].result.left.final_score == 12);
  CHECK(rows[2].result.right.final_score == 10);
  CHECK(rows[3].result.left.final_score == 15);
  CHECK(rows[3].result.risk_band == RiskBand::very_high);
}

TEST_CASE("malformed rows are flagged and the batch continues") {
  const auto src = std::string(ERGO_DATA_DIR) + "/postures.csv";
  std::ifstream in(src);
  std::string line, content;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 3) {
      auto broken = line;
      broken.replace(0, 2, "oops");  // text in the trunk angle column
      content += broken + "\n";
    } else {
      content += line + "\n";
    }
  }
  const auto tmp = std::filesystem::temp_directory_path() / "ergo_postures_broken.csv";
  std::ofstream(tmp) << content;
  const auto rows = batch_score(tmp.string());
  REQUIRE(rows.size() == 4);
  CHECK_FALSE(rows[1].ok);
  CHECK(rows[1].error.find(":3") != std::string::npos);
  CHECK(rows[0].ok);
  CHECK(rows[2].ok);
  CHECK(rows[3].ok);
  std::filesystem::remove(tmp);
}

TEST_CASE("an empty posture file is an empty report") {
  const auto tmp = std::filesystem::temp_directory_path() / "ergo_postures_empty.csv";
  {
    std::ifstream in(std::string(ERGO_DATA_DIR) + "/postures.csv");
    std::string header;
    std::getline(in, header);
    std::ofstream(tmp) << header << "\n";
  }
  CHECK(batch_score(tmp.string()).empty());
  std::filesystem::remove(tmp);

  CHECK_THROWS_AS(batch_score("/nonexistent/postures.csv"), std::runtime_error);
}
