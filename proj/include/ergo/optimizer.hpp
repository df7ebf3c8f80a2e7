#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ergo/anthro.hpp"
#include "ergo/mechanism.hpp"

namespace ergo::opt {

enum class Status { optimal, infeasible, unbounded, degenerate };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::degenerate: return "degenerate";
  }
  return "?";
}

/// Maximise the minimum mechanical advantage over (OE, CB, BD) subject to the
/// handle-height, container-volume and turning-width constraints. The minimum
/// MA over the bucket's travel occurs where sin(gamma) peaks, i.e. gamma = 90
/// degrees whenever the travel range reaches it.
struct OptimizationProblem {
  anthro::ConstraintBounds bounds;
  double alpha_eval_deg = 60.0;  // handle at top of stroke
  double gamma_eval_deg = 90.0;  // minimum-MA bucket position
  double gamma_max_deg = 120.0;
  double oe_max_cm = 115.0;
  double cb_max_cm = 115.0;
  double bd_max_cm = 115.0;
  double tolerance = 0.25;  // constraint tolerance, native units (volume scales by width)

  // Deliberately does not insist on positive bounds: a zero volume bound is a
  // legal (degenerate) problem that solve() reports as unbounded.
  void validate() const {
    if (!(alpha_eval_deg > 0 && alpha_eval_deg < 90))
      throw std::invalid_argument("alpha_eval must lie in (0, 90)");
    const double expected = gamma_max_deg >= 90.0 ? 90.0 : gamma_max_deg;
    if (std::abs(gamma_eval_deg - expected) > 1e-9)
      throw std::invalid_argument("gamma_eval must be the minimum-MA position min(90, gamma_max)");
    if (!(oe_max_cm > 0 && cb_max_cm > 0 && bd_max_cm > 0))
      throw std::invalid_argument("variable upper limits must be > 0");
    if (!(tolerance >= 0)) throw std::invalid_argument("tolerance must be >= 0");
  }

  mech::MechanismGeometry make_geometry(double oe, double cb, double bd) const {
    mech::MechanismGeometry g;
    g.oe_cm = oe;
    g.cb_cm = cb;
    g.bd_cm = bd;
    g.fe_cm = bounds.slider_gap_cm;
    g.gd_cm = bounds.ground_clearance_cm;
    g.width_cm = bounds.min_equipment_width_cm;
    g.alpha_max_deg = alpha_eval_deg;
    g.gamma_max_deg = gamma_max_deg;
    return g;
  }
};

struct SolveTrace {
  int starts = 0;
  int best_start = -1;
  int outer_iterations = 0;
};

struct OptimizationResult {
  mech::MechanismGeometry geometry;
  double objective = 0.0;
  mech::ConstraintSlacks slacks;
  Status status = Status::infeasible;
  SolveTrace trace;
};

/// Minimum mechanical advantage of a candidate geometry, i.e. MA at the
/// problem's evaluation angle (OE / (2 (CB+BD)) at gamma = 90).
inline double objective(const mech::MechanismGeometry& g, const OptimizationProblem& p) {
  return mech::mechanical_advantage(g, p.gamma_eval_deg);
}

namespace detail {

struct Candidate {
  double oe = 0, cb = 0, bd = 0, obj = -1;
  bool valid = false;

  // Higher objective wins; ties prefer the smaller arm (cb+bd), then oe, cb, bd.
  bool better_than(const Candidate& o) const {
    if (!o.valid) return valid;
    if (obj != o.obj) return obj > o.obj;
    const double s = cb + bd, os = o.cb + o.bd;
    if (s != os) return s < os;
    if (oe != o.oe) return oe < o.oe;
    if (cb != o.cb) return cb < o.cb;
    return bd < o.bd;
  }
};

}  // namespace detail

/// Exhaustive enumeration of the variable box on a uniform grid; ground truth
/// for certifying the gradient solver. Feasibility uses the same slack
/// evaluation as check_feasibility, at the problem tolerance.
inline OptimizationResult grid_search_oracle(const OptimizationProblem& p, double resolution_cm) {
  p.validate();
  if (!(resolution_cm > 0)) throw std::invalid_argument("oracle resolution must be > 0");
  const double t = std::tan(mech::deg_to_rad(p.alpha_eval_deg));
  const double s2 = 1.0 + std::sin(mech::deg_to_rad(p.alpha_eval_deg) / 2.0);
  const double c = std::cos(mech::deg_to_rad(p.alpha_eval_deg) / 2.0);
  const double w = p.bounds.min_equipment_width_cm;
  const double H = p.bounds.max_handle_height_cm + p.tolerance;
  const double fe = p.bounds.slider_gap_cm, gd = p.bounds.ground_clearance_cm;
  const double vol_need = p.bounds.min_container_volume_cm3 - p.tolerance * w;

  const auto steps = [&](double ub) { return static_cast<long>(std::floor(ub / resolution_cm + 1e-9)); };
  const long n_oe = steps(p.oe_max_cm), n_cb = steps(p.cb_max_cm), n_bd = steps(p.bd_max_cm);

  detail::Candidate best;
  for (long i = 0; i <= n_oe; ++i) {
    const double oe = i * resolution_cm;
    for (long j = 0; j <= n_cb; ++j) {
      const double cb = j * resolution_cm;
      const double hh_base = t * oe + s2 * cb;
      if (hh_base > H) break;  // grows with cb, no bd can recover
      const double reach = oe + c * cb + p.bounds.worker_depth_cm;
      if (2.0 * std::sqrt(w * w + reach * reach) >
          p.bounds.max_turning_width_cm + p.tolerance)
        break;  // also grows with cb

      // Feasible bd forms an interval; the smallest feasible bd maximises the
      // objective for this (oe, cb) column.
      double bd_lo = 0.0;
      const double plate = oe + c * cb - fe;
      if (vol_need > 0) {
        if (plate <= 0.0) continue;
        bd_lo = std::max(bd_lo, gd + vol_need / (w * plate) - cb);
      }
      const double bd_hi = std::min(H - hh_base, p.bd_max_cm);
      long k = static_cast<long>(std::ceil(bd_lo / resolution_cm - 1e-9));
      if (k < 0) k = 0;
      for (; k * resolution_cm <= bd_hi + 1e-12 && k <= n_bd; ++k) {
        const double bd = k * resolution_cm;
        if (cb + bd <= 0.0) continue;
        const auto geom = p.make_geometry(oe, cb, bd);
        if (!mech::check_feasibility(geom, p.bounds, p.tolerance).feasible) continue;
        detail::Candidate cand{oe, cb, bd, objective(geom, p), true};
        if (cand.better_than(best)) best = cand;
        break;  // larger bd in this column only lowers the objective
      }
    }
  }

  OptimizationResult res;
  if (!best.valid) {
    res.status = Status::infeasible;
    res.geometry = p.make_geometry(0, 0, 0);
    return res;
  }
  res.geometry = p.make_geometry(best.oe, best.cb, best.bd);
  res.objective = best.obj;
  res.slacks = mech::check_feasibility(res.geometry, p.bounds, p.tolerance);
  res.status = Status::optimal;
  return res;
}

namespace detail {

struct AugLag {
  const OptimizationProblem& p;
  double t, s2, c, w, sg, delta = 1e-3;

  explicit AugLag(const OptimizationProblem& prob) : p(prob) {
    t = std::tan(mech::deg_to_rad(p.alpha_eval_deg));
    s2 = 1.0 + std::sin(mech::deg_to_rad(p.alpha_eval_deg) / 2.0);
    c = std::cos(mech::deg_to_rad(p.alpha_eval_deg) / 2.0);
    w = p.bounds.min_equipment_width_cm;
    sg = std::sin(mech::deg_to_rad(p.gamma_eval_deg));
  }

  // Scaled constraint values g_i(x) <= 0 and gradients.
  std::array<double, 5> constraints(const std::array<double, 3>& x) const {
    const auto [oe, cb, bd] = x;
    const double P = oe + c * cb - p.bounds.slider_gap_cm;
    const double Q = cb + bd - p.bounds.ground_clearance_cm;
    const double reach = oe + c * cb + p.bounds.worker_depth_cm;
    return {
        t * oe + s2 * cb + bd - p.bounds.max_handle_height_cm,
        (p.bounds.min_container_volume_cm3 / w - P * Q) / 10.0,
        std::sqrt(w * w + reach * reach) - p.bounds.max_turning_width_cm / 2.0,
        delta - P,
        delta - Q,
    };
  }

  std::array<std::array<double, 3>, 5> constraint_grads(const std::array<double, 3>& x) const {
    const auto [oe, cb, bd] = x;
    const double P = oe + c * cb - p.bounds.slider_gap_cm;
    const double Q = cb + bd - p.bounds.ground_clearance_cm;
    const double reach = oe + c * cb + p.bounds.worker_depth_cm;
    const double root = std::sqrt(w * w + reach * reach);
    const double tr = reach / root;
    return {{
        {t, s2, 1.0},
        {-Q / 10.0, -(c * Q + P) / 10.0, -P / 10.0},
        {tr, tr * c, 0.0},
        {-1.0, -c, 0.0},
        {0.0, -1.0, -1.0},
    }};
  }

  double neg_objective(const std::array<double, 3>& x) const {
    const double s = x[1] + x[2];
    return -x[0] / (2.0 * std::max(s, 1e-9) * sg);
  }

  std::array<double, 3> neg_objective_grad(const std::array<double, 3>& x) const {
    const double s = std::max(x[1] + x[2], 1e-9);
    const double d_cb = x[0] / (2.0 * s * s * sg);
    return {-1.0 / (2.0 * s * sg), d_cb, d_cb};
  }

  double merit(const std::array<double, 3>& x, const std::array<double, 5>& lam, double mu) const {
    double phi = neg_objective(x);
    const auto g = constraints(x);
    for (int i = 0; i < 5; ++i) {
      const double a = std::max(0.0, lam[i] + mu * g[i]);
      phi += (a * a - lam[i] * lam[i]) / (2.0 * mu);
    }
    return phi;
  }

  std::array<double, 3> merit_grad(const std::array<double, 3>& x, const std::array<double, 5>& lam,
                                   double mu) const {
    auto grad = neg_objective_grad(x);
    const auto g = constraints(x);
    const auto gg = constraint_grads(x);
    for (int i = 0; i < 5; ++i) {
      const double a = std::max(0.0, lam[i] + mu * g[i]);
      if (a > 0.0)
        for (int k = 0; k < 3; ++k) grad[k] += a * gg[i][k];
    }
    return grad;
  }
};

inline std::array<double, 3> clamp_box(std::array<double, 3> x, const OptimizationProblem& p) {
  x[0] = std::clamp(x[0], 0.0, p.oe_max_cm);
  x[1] = std::clamp(x[1], 0.0, p.cb_max_cm);
  x[2] = std::clamp(x[2], 0.0, p.bd_max_cm);
  return x;
}

/// Solves the 3x3 system (H + nu I) d = -g; returns false when the damped
/// matrix is numerically singular.
inline bool newton_direction(const std::array<std::array<double, 3>, 3>& h,
                             const std::array<double, 3>& g, double nu,
                             std::array<double, 3>& d) {
  double a[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int cc = 0; cc < 3; ++cc) a[r][cc] = h[r][cc] + (r == cc ? nu : 0.0);
    a[r][3] = -g[r];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-14) return false;
    std::swap(a[col], a[piv]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int cc = col; cc < 4; ++cc) a[r][cc] -= f * a[col][cc];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = a[r][3];
    for (int cc = r + 1; cc < 3; ++cc) s -= a[r][cc] * d[cc];
    d[r] = s / a[r][r];
  }
  return true;
}

/// Damped-Newton descent on the augmented Lagrangian with box projection.
/// The Hessian is finite-differenced from the analytic gradient; a step cap
/// keeps the iterate inside the current valley even when the penalty surface
/// kinks close by, and the Armijo test uses the actual directional slope.
inline std::array<double, 3> minimize_merit(const AugLag& al, std::array<double, 3> x,
                                            const std::array<double, 5>& lam, double mu) {
  constexpr double kStepCap = 5.0;  // cm, problem scale
  double nu = 1e-3;
  int stuck = 0;
  for (int it = 0; it < 300; ++it) {
    const double phi = al.merit(x, lam, mu);
    const auto grad = al.merit_grad(x, lam, mu);

    const auto proj = clamp_box({x[0] - grad[0], x[1] - grad[1], x[2] - grad[2]}, al.p);
    double pg = 0.0;
    for (int k = 0; k < 3; ++k) pg = std::max(pg, std::abs(proj[k] - x[k]));
    if (pg < 1e-13 * (1.0 + std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]))) break;

    std::array<std::array<double, 3>, 3> hess{};
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(x[k]));
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const auto gp = al.merit_grad(xp, lam, mu);
      const auto gm = al.merit_grad(xm, lam, mu);
      for (int r = 0; r < 3; ++r) hess[r][k] = (gp[r] - gm[r]) / (2.0 * h);
    }
    for (int r = 0; r < 3; ++r)
      for (int cc = r + 1; cc < 3; ++cc) {
        const double s = 0.5 * (hess[r][cc] + hess[cc][r]);
        hess[r][cc] = hess[cc][r] = s;
      }

    // Newton on the free variables only: a coordinate pinned at its bound
    // with the gradient pushing outward stays put, otherwise the projected
    // full-space step degrades to a crawl along active faces.
    const double ub[3] = {al.p.oe_max_cm, al.p.cb_max_cm, al.p.bd_max_cm};
    auto reduced_h = hess;
    auto reduced_g = grad;
    for (int k = 0; k < 3; ++k) {
      const bool pinned = (x[k] <= 1e-12 && grad[k] > 0.0) ||
                          (x[k] >= ub[k] - 1e-12 && grad[k] < 0.0);
      if (!pinned) continue;
      for (int r = 0; r < 3; ++r) reduced_h[r][k] = reduced_h[k][r] = 0.0;
      reduced_h[k][k] = 1.0;
      reduced_g[k] = 0.0;
    }

    const double gnorm =
        std::max({std::abs(reduced_g[0]), std::abs(reduced_g[1]), std::abs(reduced_g[2])});
    if (gnorm == 0.0) break;
    std::array<double, 3> dir{};
    bool have_dir = false;
    double nu_try = std::max(nu, 1e-8);
    for (int attempt = 0; attempt < 30 && !have_dir; ++attempt) {
      if (newton_direction(reduced_h, reduced_g, nu_try, dir)) {
        const double slope = dir[0] * reduced_g[0] + dir[1] * reduced_g[1] + dir[2] * reduced_g[2];
        const double dnorm = std::max({std::abs(dir[0]), std::abs(dir[1]), std::abs(dir[2])});
        if (slope < -1e-14 * gnorm * dnorm) have_dir = true;
      }
      if (!have_dir) nu_try *= 10.0;
    }
    if (!have_dir) {
      for (int k = 0; k < 3; ++k) dir[k] = -reduced_g[k];
      nu_try = nu;
    }

    double dnorm = std::max({std::abs(dir[0]), std::abs(dir[1]), std::abs(dir[2])});
    if (dnorm > kStepCap)
      for (int k = 0; k < 3; ++k) dir[k] *= kStepCap / dnorm;
    const double slope = dir[0] * grad[0] + dir[1] * grad[1] + dir[2] * grad[2];

    double step = 1.0;
    bool accepted = false;
    while (step >= 1e-14) {
      const auto cand = clamp_box(
          {x[0] + step * dir[0], x[1] + step * dir[1], x[2] + step * dir[2]}, al.p);
      double moved = 0.0;
      for (int k = 0; k < 3; ++k) moved = std::max(moved, std::abs(cand[k] - x[k]));
      if (moved == 0.0) break;
      if (al.merit(cand, lam, mu) <= phi + 1e-4 * step * slope) {
        x = cand;
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (accepted) {
      stuck = 0;
      nu = std::max(step == 1.0 ? nu_try * 0.3 : nu_try, 1e-8);
    } else {
      nu = std::min(std::max(nu, 1e-8) * 100.0, 1e10);
      if (++stuck >= 3) break;  // no descent at any damping
    }
  }
  return x;
}

/// Augmented-Lagrangian outer loop from one start. Returns the best iterate
/// that passes the working feasibility check, so a late penalty blow-up can
/// never discard an already-good point.
inline std::array<double, 3> solve_from(const AugLag& al, std::array<double, 3> x, int& outer_used) {
  std::array<double, 5> lam{};
  double mu = 10.0;
  double prev_viol = std::numeric_limits<double>::infinity();

  std::array<double, 3> best = x;
  double best_obj = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  auto consider = [&](const std::array<double, 3>& cand) {
    if (cand[1] + cand[2] <= 0.0) return;
    const auto geom = al.p.make_geometry(cand[0], cand[1], cand[2]);
    if (!mech::check_feasibility(geom, al.p.bounds, al.p.tolerance).feasible) return;
    const double obj = cand[0] / (2.0 * (cand[1] + cand[2]) * al.sg);
    if (obj > best_obj) {
      best_obj = obj;
      best = cand;
      have_best = true;
    }
  };
  consider(x);

  for (int outer = 0; outer < 40; ++outer) {
    const auto prev = x;
    x = minimize_merit(al, x, lam, mu);
    consider(x);
    const auto g = al.constraints(x);
    double viol = 0.0;
    for (int i = 0; i < 5; ++i) viol = std::max(viol, g[i]);
    for (int i = 0; i < 5; ++i) lam[i] = std::max(0.0, lam[i] + mu * g[i]);
    outer_used = outer + 1;
    double moved = 0.0;
    for (int k = 0; k < 3; ++k) moved = std::max(moved, std::abs(x[k] - prev[k]));
    if (outer >= 3 && (viol <= 1e-9 || moved <= 1e-11) && mu >= 1e5) break;
    if (viol > 0.25 * prev_viol) mu = std::min(mu * 5.0, 1e7);
    prev_viol = std::max(viol, 1e-300);
  }
  return have_best ? best : x;
}

}  // namespace detail

/// Deterministic multi-start augmented-Lagrangian solve. An explicit start
/// replaces the 8-point lattice. The result is certified feasible via
/// check_feasibility at the problem tolerance; when no start reaches a
/// feasible point the status is infeasible.
inline OptimizationResult solve(const OptimizationProblem& p,
                                std::optional<mech::MechanismGeometry> start = std::nullopt) {
  p.validate();

  OptimizationResult res;
  if (p.bounds.min_container_volume_cm3 <= 0.0) {
    // The capacity constraint can never bind from below, so the arm length
    // cb+bd may shrink toward zero and the objective grows without bound.
    const double oe_cap = std::min(
        p.oe_max_cm, (p.bounds.max_handle_height_cm + p.tolerance) /
                         std::tan(mech::deg_to_rad(p.alpha_eval_deg)));
    res.status = oe_cap > 0.0 ? Status::unbounded : Status::degenerate;
    res.geometry = p.make_geometry(0, 0, 0);
    return res;
  }

  std::vector<std::array<double, 3>> starts;
  if (start) {
    starts.push_back(detail::clamp_box({start->oe_cm, start->cb_cm, start->bd_cm}, p));
  } else {
    for (double fo : {0.25, 0.75})
      for (double fc : {0.25, 0.75})
        for (double fb : {0.25, 0.75})
          starts.push_back({fo * p.oe_max_cm, fc * p.cb_max_cm, fb * p.bd_max_cm});
  }
  // A coarse deterministic scan seeds one start in the best basin it can see;
  // the fixed lattice alone can miss the global valley for some bound sets.
  const auto coarse = grid_search_oracle(p, 2.0);
  if (coarse.status == Status::optimal)
    starts.push_back({coarse.geometry.oe_cm, coarse.geometry.cb_cm, coarse.geometry.bd_cm});

  const detail::AugLag al(p);
  detail::Candidate best;
  OptimizationResult best_res;
  res.trace.starts = static_cast<int>(starts.size());

  for (std::size_t s = 0; s < starts.size(); ++s) {
    int outer_used = 0;
    const auto x = detail::solve_from(al, starts[s], outer_used);
    const auto geom = p.make_geometry(x[0], x[1], x[2]);
    if (geom.cb_cm + geom.bd_cm <= 0.0) continue;
    const auto slacks = mech::check_feasibility(geom, p.bounds, p.tolerance);
    if (!slacks.feasible) continue;
    detail::Candidate cand{x[0], x[1], x[2], objective(geom, p), true};
    if (cand.better_than(best)) {
      best = cand;
      best_res.geometry = geom;
      best_res.objective = cand.obj;
      best_res.slacks = slacks;
      best_res.status = Status::optimal;
      best_res.trace = {res.trace.starts, static_cast<int>(s), outer_used};
    }
  }

  if (!best.valid) {
    res.status = Status::infeasible;
    res.geometry = p.make_geometry(0, 0, 0);
    res.slacks = mech::check_feasibility(res.geometry, p.bounds, p.tolerance);
    return res;
  }
  return best_res;
}

}  // namespace ergo::opt
