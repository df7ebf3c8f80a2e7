#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergo/csv.hpp"
#include "ergo/stats.hpp"

namespace ergo::doe {

enum class FactorKind { continuous, categorical };

struct Factor {
  std::string name;
  FactorKind kind = FactorKind::continuous;
  std::vector<double> numeric_levels;      // continuous
  std::vector<std::string> label_levels;   // categorical

  std::size_t level_count() const {
    return kind == FactorKind::continuous ? numeric_levels.size() : label_levels.size();
  }

  void validate() const {
    if (level_count() < 2) throw std::invalid_argument("factor '" + name + "' needs >= 2 levels");
    if (kind == FactorKind::continuous)
      for (std::size_t i = 1; i < numeric_levels.size(); ++i)
        if (!(numeric_levels[i] > numeric_levels[i - 1]))
          throw std::invalid_argument("factor '" + name + "': levels must be strictly increasing");
  }

  std::string level_text(std::size_t idx) const {
    if (kind == FactorKind::categorical) return label_levels.at(idx);
    std::ostringstream os;
    os << numeric_levels.at(idx);
    return os.str();
  }
};

struct Run {
  std::vector<int> level;  // level index per factor
  int replicate = 0;
};

struct FactorialDesign {
  std::vector<Factor> factors;
  int replications = 1;
  std::vector<Run> runs;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& f : factors) n *= f.level_count();
    return n;
  }
};

/// Full cross product of every factor level, replicated. Runs are ordered
/// lexicographically (first factor slowest) with the replicate index innermost.
inline FactorialDesign generate_design(std::vector<Factor> factors, int replications) {
  if (factors.empty()) throw std::invalid_argument("generate_design: no factors");
  if (replications < 1) throw std::invalid_argument("generate_design: replications must be >= 1");
  for (const auto& f : factors) f.validate();

  FactorialDesign d;
  d.factors = std::move(factors);
  d.replications = replications;
  std::vector<int> idx(d.factors.size(), 0);
  while (true) {
    for (int rep = 1; rep <= replications; ++rep) d.runs.push_back({idx, rep});
    int k = static_cast<int>(idx.size()) - 1;
    while (k >= 0) {
      if (++idx[k] < static_cast<int>(d.factors[k].level_count())) break;
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return d;
}

struct ObservationSet {
  FactorialDesign design;
  std::vector<double> response;

  void validate() const {
    if (response.size() != design.runs.size())
      throw std::invalid_argument("observation set: one response per run required");
    for (double y : response)
      if (!std::isfinite(y) || y < 0)
        throw std::invalid_argument("observation set: responses must be finite and >= 0");
  }
};

enum class TermKind { intercept, linear, square, interaction };

struct TermSpec {
  TermKind kind = TermKind::intercept;
  int f1 = -1, f2 = -1;
  std::string name;
};

/// Candidate model matrix in coded units: continuous factors mapped linearly
/// onto [-1, +1] over their level range, two-level categoricals as -1/+1.
struct ModelMatrix {
  std::vector<TermSpec> terms;
  std::vector<double> values;  // runs x terms, row major
  std::size_t rows = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * terms.size() + c]; }
};

namespace detail {

inline double coded_level(const Factor& f, int level_idx) {
  if (f.kind == FactorKind::categorical) {
    if (f.label_levels.size() != 2)
      throw std::invalid_argument("encode: categorical factor '" + f.name +
                                  "' has more than 2 levels (unsupported)");
    return level_idx == 0 ? -1.0 : 1.0;
  }
  const double lo = f.numeric_levels.front(), hi = f.numeric_levels.back();
  return (2.0 * f.numeric_levels.at(level_idx) - (hi + lo)) / (hi - lo);
}

inline double coded_numeric(const Factor& f, double raw) {
  const double lo = f.numeric_levels.front(), hi = f.numeric_levels.back();
  return (2.0 * raw - (hi + lo)) / (hi - lo);
}

inline double term_value(const TermSpec& t, const std::vector<double>& coded) {
  switch (t.kind) {
    case TermKind::intercept: return 1.0;
    case TermKind::linear: return coded[t.f1];
    case TermKind::square: return coded[t.f1] * coded[t.f1];
    case TermKind::interaction: return coded[t.f1] * coded[t.f2];
  }
  return 0.0;
}

}  // namespace detail

inline std::vector<TermSpec> candidate_terms(const std::vector<Factor>& factors) {
  std::vector<TermSpec> terms;
  terms.push_back({TermKind::intercept, -1, -1, "intercept"});
  const int n = static_cast<int>(factors.size());
  for (int i = 0; i < n; ++i) terms.push_back({TermKind::linear, i, -1, factors[i].name});
  for (int i = 0; i < n; ++i)
    if (factors[i].kind == FactorKind::continuous)
      terms.push_back({TermKind::square, i, -1, factors[i].name + "^2"});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      terms.push_back({TermKind::interaction, i, j, factors[i].name + "*" + factors[j].name});
  return terms;
}

inline ModelMatrix encode(const FactorialDesign& design) {
  for (const auto& f : design.factors) f.validate();
  ModelMatrix m;
  m.terms = candidate_terms(design.factors);
  m.rows = design.runs.size();
  m.values.resize(m.rows * m.terms.size());
  std::vector<double> coded(design.factors.size());
  for (std::size_t r = 0; r < design.runs.size(); ++r) {
    for (std::size_t f = 0; f < design.factors.size(); ++f)
      coded[f] = detail::coded_level(design.factors[f], design.runs[r].level[f]);
    for (std::size_t c = 0; c < m.terms.size(); ++c)
      m.values[r * m.terms.size() + c] = detail::term_value(m.terms[c], coded);
  }
  return m;
}

namespace detail {

struct LsqFit {
  std::vector<double> coef;   // per selected column
  double sse = 0.0;
  int dfe = 0;
  bool rank_deficient = false;
  std::size_t dependent_col = 0;  // index into `cols` when rank deficient
};

/// Householder QR least squares on the selected columns. Flags the first
/// column that is numerically dependent on its predecessors.
inline LsqFit lsq(const ModelMatrix& m, const std::vector<std::size_t>& cols,
                  const std::vector<double>& y) {
  const std::size_t n = m.rows, p = cols.size();
  std::vector<double> a(n * p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) a[r * p + c] = m.at(r, cols[c]);
  std::vector<double> qty(y);

  double max_norm = 0.0;
  for (std::size_t c = 0; c < p; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += a[r * p + c] * a[r * p + c];
    max_norm = std::max(max_norm, std::sqrt(s));
  }
  const double rank_tol = std::max(max_norm, 1.0) * 1e-10;

  LsqFit fit;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t r = k; r < n; ++r) norm += a[r * p + k] * a[r * p + k];
    norm = std::sqrt(norm);
    if (norm <= rank_tol) {
      fit.rank_deficient = true;
      fit.dependent_col = k;
      return fit;
    }
    const double alpha = a[k * p + k] >= 0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t r = k; r < n; ++r) {
      v[r] = a[r * p + k];
      if (r == k) v[r] -= alpha;
      vnorm2 += v[r] * v[r];
    }
    if (vnorm2 > 0) {
      for (std::size_t c = k; c < p; ++c) {
        double dot = 0.0;
        for (std::size_t r = k; r < n; ++r) dot += v[r] * a[r * p + c];
        const double s = 2.0 * dot / vnorm2;
        for (std::size_t r = k; r < n; ++r) a[r * p + c] -= s * v[r];
      }
      double dot = 0.0;
      for (std::size_t r = k; r < n; ++r) dot += v[r] * qty[r];
      const double s = 2.0 * dot / vnorm2;
      for (std::size_t r = k; r < n; ++r) qty[r] -= s * v[r];
    }
    a[k * p + k] = alpha;
    if (std::abs(alpha) <= rank_tol) {
      fit.rank_deficient = true;
      fit.dependent_col = k;
      return fit;
    }
  }

  fit.coef.assign(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = qty[k];
    for (std::size_t c = k + 1; c < p; ++c) s -= a[k * p + c] * fit.coef[c];
    fit.coef[k] = s / a[k * p + k];
  }
  for (std::size_t r = p; r < n; ++r) fit.sse += qty[r] * qty[r];
  fit.dfe = static_cast<int>(n) - static_cast<int>(p);
  return fit;
}

inline double total_ss(const std::vector<double>& y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  return sst;
}

}  // namespace detail

struct RsmModel {
  std::vector<TermSpec> candidates;      // full candidate list for the design
  std::vector<std::size_t> included;     // indices into candidates, intercept first
  std::vector<double> coefficients;      // coded units, parallel to included
  double sse = 0.0;
  int dfe = 0;
  std::size_t n_runs = 0;

  const TermSpec& term(std::size_t i) const { return candidates[included[i]]; }

  double predict_coded(const std::vector<double>& coded) const {
    double y = 0.0;
    for (std::size_t i = 0; i < included.size(); ++i)
      y += coefficients[i] * detail::term_value(candidates[included[i]], coded);
    return y;
  }
};

/// Ordinary least squares on an explicit term set. Rank deficiency is an
/// error naming the aliased column.
inline RsmModel fit_ols(const ObservationSet& obs, const std::vector<std::size_t>& included_terms) {
  obs.validate();
  const ModelMatrix m = encode(obs.design);
  auto fit = detail::lsq(m, included_terms, obs.response);
  if (fit.rank_deficient)
    throw std::invalid_argument("aliased term '" +
                                m.terms[included_terms[fit.dependent_col]].name +
                                "' makes the model matrix rank deficient");
  RsmModel model;
  model.candidates = m.terms;
  model.included = included_terms;
  model.coefficients = fit.coef;
  model.sse = fit.sse;
  model.dfe = fit.dfe;
  model.n_runs = m.rows;
  return model;
}

/// Stepwise term selection with partial-F entry/removal tests. Entry adds the
/// candidate with the smallest p-value below alpha_enter; removal drops the
/// included term with the largest p-value above alpha_remove; iterate to a
/// fixpoint. Candidates that would alias the current model (for example the
/// square of a two-level factor against the intercept) can never enter and
/// are skipped. Hierarchy is not enforced.
inline RsmModel fit_stepwise(const ObservationSet& obs, double alpha_enter = 0.15,
                             double alpha_remove = 0.15) {
  obs.validate();
  const ModelMatrix m = encode(obs.design);
  const std::size_t n = m.rows, nterms = m.terms.size();
  const double sst = detail::total_ss(obs.response);
  const double zero_tol = 1e-12 * std::max(sst, 1.0);

  std::vector<std::size_t> included{0};  // intercept
  auto cur = detail::lsq(m, included, obs.response);
  if (cur.rank_deficient) throw std::invalid_argument("stepwise: degenerate design (no runs?)");

  auto partial_p = [&](double ss_drop, double sse_full, int dfe_full) {
    if (dfe_full < 1) return 1.0;
    ss_drop = std::max(ss_drop, 0.0);
    const double mse = sse_full / dfe_full;
    if (mse <= zero_tol) return ss_drop > zero_tol ? 0.0 : 1.0;
    return stats::f_tail(ss_drop / mse, 1.0, dfe_full);
  };

  std::set<std::vector<std::size_t>> seen{included};
  for (;;) {
    bool changed = false;

    // entry scan
    double best_p = 2.0;
    std::size_t best_term = 0;
    detail::LsqFit best_fit;
    for (std::size_t t = 0; t < nterms; ++t) {
      if (std::find(included.begin(), included.end(), t) != included.end()) continue;
      auto cols = included;
      cols.push_back(t);
      if (static_cast<int>(n) - static_cast<int>(cols.size()) < 1) continue;
      auto trial = detail::lsq(m, cols, obs.response);
      if (trial.rank_deficient) continue;  // aliased with the current model
      const double p = partial_p(cur.sse - trial.sse, trial.sse, trial.dfe);
      if (p < best_p) {
        best_p = p;
        best_term = t;
        best_fit = trial;
      }
    }
    if (best_p < alpha_enter) {
      included.push_back(best_term);
      cur = best_fit;
      changed = true;
    }

    // removal scan
    if (included.size() > 1) {
      double worst_p = -1.0;
      std::size_t worst_pos = 0;
      detail::LsqFit worst_fit;
      for (std::size_t i = 1; i < included.size(); ++i) {
        auto cols = included;
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(i));
        auto reduced = detail::lsq(m, cols, obs.response);
        if (reduced.rank_deficient) continue;
        const double p = partial_p(reduced.sse - cur.sse, cur.sse, cur.dfe);
        if (p > worst_p) {
          worst_p = p;
          worst_pos = i;
          worst_fit = reduced;
        }
      }
      if (worst_p > alpha_remove) {
        included.erase(included.begin() + static_cast<std::ptrdiff_t>(worst_pos));
        cur = worst_fit;
        changed = true;
      }
    }

    if (!changed) break;
    auto state = included;
    std::sort(state.begin(), state.end());
    if (!seen.insert(state).second) break;  // cycle guard
  }

  RsmModel model;
  model.candidates = m.terms;
  model.included = included;
  model.coefficients = cur.coef;
  model.sse = cur.sse;
  model.dfe = cur.dfe;
  model.n_runs = n;
  return model;
}

struct AnovaRow {
  std::string term;
  int df = 1;
  double adj_ss = 0.0;
  double adj_ms = 0.0;
  double f = 0.0;
  double p = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  double mse = 0.0;
  int dfe = 0;
};

/// Adjusted (type III) sums of squares: each term is tested against the model
/// with that term removed and everything else kept.
inline AnovaTable anova(const RsmModel& model, const ObservationSet& obs) {
  obs.validate();
  const ModelMatrix m = encode(obs.design);
  if (model.n_runs != m.rows || model.candidates.size() != m.terms.size())
    throw std::invalid_argument("anova: model was fitted on a different observation set");
  if (model.dfe < 1) throw std::domain_error("anova: zero error degrees of freedom (perfect fit)");
  const double sst = detail::total_ss(obs.response);
  const double zero_tol = 1e-12 * std::max(sst, 1.0);
  const double mse = model.sse / model.dfe;
  if (mse <= zero_tol) throw std::domain_error("anova: zero residual variance (perfect fit)");

  AnovaTable table;
  table.mse = mse;
  table.dfe = model.dfe;
  for (std::size_t i = 1; i < model.included.size(); ++i) {
    auto cols = model.included;
    cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(i));
    auto reduced = detail::lsq(m, cols, obs.response);
    if (reduced.rank_deficient)
      throw std::invalid_argument("anova: model without '" + model.term(i).name +
                                  "' is rank deficient");
    AnovaRow row;
    row.term = model.term(i).name;
    row.adj_ss = std::max(reduced.sse - model.sse, 0.0);
    row.adj_ms = row.adj_ss / row.df;
    row.f = row.adj_ms / mse;
    row.p = stats::f_tail(row.f, row.df, model.dfe);
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Coefficient of determination in percent, 100 (1 - SSE/SST).
inline double r_squared(const RsmModel& model, const ObservationSet& obs) {
  obs.validate();
  const double sst = detail::total_ss(obs.response);
  if (sst <= 0) throw std::domain_error("r_squared: response has zero total variance");
  return 100.0 * (1.0 - model.sse / sst);
}

struct FactorSetting {
  std::string factor;
  std::string value;   // numeric text for continuous, label for categorical
  double coded = 0.0;
};

struct DesirabilitySolution {
  std::vector<FactorSetting> settings;
  double predicted = 0.0;
  double desirability = 0.0;  // (U - yhat)/(U - L) clipped to [0, 1]
};

/// Candidate settings per factor; numeric values for continuous factors,
/// level indices for categorical ones.
struct CandidateGrid {
  std::vector<std::vector<double>> numeric;      // per factor (continuous)
  std::vector<std::vector<std::size_t>> labels;  // per factor (categorical level index)
};

inline CandidateGrid grid_from_levels(const FactorialDesign& design) {
  CandidateGrid g;
  g.numeric.resize(design.factors.size());
  g.labels.resize(design.factors.size());
  for (std::size_t f = 0; f < design.factors.size(); ++f) {
    if (design.factors[f].kind == FactorKind::continuous)
      g.numeric[f] = design.factors[f].numeric_levels;
    else
      for (std::size_t l = 0; l < design.factors[f].label_levels.size(); ++l)
        g.labels[f].push_back(l);
  }
  return g;
}

/// Exhaustive search for the setting that maximises minimisation desirability
/// over the observed response range. Ties keep the lexicographically first
/// setting in factor-declaration order.
inline DesirabilitySolution desirability_optimize(const RsmModel& model, const ObservationSet& obs,
                                                  const CandidateGrid& grid) {
  obs.validate();
  const auto& factors = obs.design.factors;
  if (grid.numeric.size() != factors.size() || grid.labels.size() != factors.size())
    throw std::invalid_argument("desirability grid must cover every factor");
  std::vector<std::size_t> sizes(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) {
    sizes[f] = factors[f].kind == FactorKind::continuous ? grid.numeric[f].size()
                                                         : grid.labels[f].size();
    if (sizes[f] == 0) throw std::invalid_argument("desirability grid is empty for factor '" +
                                                   factors[f].name + "'");
  }
  const double lo = *std::min_element(obs.response.begin(), obs.response.end());
  const double hi = *std::max_element(obs.response.begin(), obs.response.end());
  if (!(hi > lo)) throw std::domain_error("desirability: degenerate response range");

  DesirabilitySolution best;
  best.desirability = -1.0;
  std::vector<std::size_t> idx(factors.size(), 0);
  std::vector<double> coded(factors.size());
  for (;;) {
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (factors[f].kind == FactorKind::continuous)
        coded[f] = detail::coded_numeric(factors[f], grid.numeric[f][idx[f]]);
      else
        coded[f] = detail::coded_level(factors[f], static_cast<int>(grid.labels[f][idx[f]]));
    }
    const double yhat = model.predict_coded(coded);
    const double d = std::clamp((hi - yhat) / (hi - lo), 0.0, 1.0);
    if (d > best.desirability) {
      best.desirability = d;
      best.predicted = yhat;
      best.settings.clear();
      for (std::size_t f = 0; f < factors.size(); ++f) {
        FactorSetting s;
        s.factor = factors[f].name;
        s.coded = coded[f];
        if (factors[f].kind == FactorKind::continuous) {
          std::ostringstream os;
          os << grid.numeric[f][idx[f]];
          s.value = os.str();
        } else {
          s.value = factors[f].label_levels[grid.labels[f][idx[f]]];
        }
        best.settings.push_back(std::move(s));
      }
    }
    std::size_t k = factors.size();
    while (k > 0) {
      --k;
      if (++idx[k] < sizes[k]) break;
      idx[k] = 0;
      if (k == 0) return best;
    }
  }
}

/// Observations CSV: one column per factor (matching the factor name), a
/// `rep` column and the response column. Every design cell must appear the
/// same number of times.
inline ObservationSet load_observations_csv(const std::string& path, std::vector<Factor> factors,
                                            const std::string& response_column = "effort_kgf") {
  for (const auto& f : factors) f.validate();
  auto file = csv::read_file(path);
  std::vector<std::size_t> fcol(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) fcol[f] = csv::column(file, factors[f].name);
  const auto c_rep = csv::column(file, "rep");
  const auto c_y = csv::column(file, response_column);

  ObservationSet obs;
  obs.design.factors = std::move(factors);
  std::map<std::vector<int>, int> cell_counts;
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    const auto& r = file.rows[i];
    const std::string ctx = path + ":" + std::to_string(file.row_lines[i]);
    Run run;
    run.level.resize(obs.design.factors.size());
    for (std::size_t f = 0; f < obs.design.factors.size(); ++f) {
      const auto& fac = obs.design.factors[f];
      const std::string& cell = r.at(fcol[f]);
      int found = -1;
      if (fac.kind == FactorKind::continuous) {
        const double v = csv::to_double(cell, ctx);
        for (std::size_t l = 0; l < fac.numeric_levels.size(); ++l)
          if (std::abs(v - fac.numeric_levels[l]) <=
              1e-9 * std::max(1.0, std::abs(fac.numeric_levels[l])))
            found = static_cast<int>(l);
      } else {
        for (std::size_t l = 0; l < fac.label_levels.size(); ++l)
          if (cell == fac.label_levels[l]) found = static_cast<int>(l);
      }
      if (found < 0)
        throw std::runtime_error("value '" + cell + "' is not a declared level of factor '" +
                                 fac.name + "' in " + ctx);
      run.level[f] = found;
    }
    run.replicate = static_cast<int>(csv::to_double(r.at(c_rep), ctx));
    obs.design.runs.push_back(run);
    obs.response.push_back(csv::to_double(r.at(c_y), ctx));
    cell_counts[run.level]++;
  }

  const std::size_t cells = obs.design.cell_count();
  if (obs.design.runs.empty() || obs.design.runs.size() % cells != 0)
    throw std::runtime_error("observations in " + path + " do not fill the factorial design");
  const int reps = static_cast<int>(obs.design.runs.size() / cells);
  if (cell_counts.size() != cells)
    throw std::runtime_error("observations in " + path + " leave some design cells empty");
  for (const auto& [cell, count] : cell_counts)
    if (count != reps)
      throw std::runtime_error("observations in " + path + " have unbalanced replication");
  obs.design.replications = reps;
  obs.validate();
  return obs;
}

}  // namespace ergo::doe
