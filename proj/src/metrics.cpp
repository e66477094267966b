#include "ampsi/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ampsi {

double relative_gap(double empirical, double predicted) {
  return std::abs(empirical - predicted) / std::max(std::abs(predicted), 1e-12);
}

double Pl2Report::max_estimate_gap() const {
  double g = 0.0;
  for (const auto& r : rows) g = std::max(g, r.estimate_gap);
  return g;
}

bool Pl2Report::all_finite_nonnegative() const {
  for (const auto& r : rows) {
    for (double v : {r.eff_obs_loss, r.estimate_loss, r.residual_loss, r.se_lambda2,
                     r.se_predicted_mse, r.se_residual}) {
      if (!std::isfinite(v) || v < 0.0) return false;
    }
  }
  return true;
}

Pl2Report corollary_checks(const AmpRun& run, const ProblemInstance& inst, const SeTrace& trace) {
  if (run.final_state.x.size() != inst.n() || run.final_state.r.size() != inst.m())
    throw std::invalid_argument("AMP run does not match the instance dimensions");
  const double sw2 = trace.params.sigma_w2;
  Pl2Report report;
  for (const auto& rec : run.records) {
    if (rec.t + 1 >= trace.lambda2.size())
      throw std::invalid_argument("SE trace does not cover iteration " + std::to_string(rec.t));
    Pl2Row row{};
    row.t = rec.t;
    row.eff_obs_loss = rec.eff_obs_loss;
    row.estimate_loss = rec.estimate_mse;
    row.residual_loss = rec.residual_loss;
    row.se_lambda2 = trace.lambda2[rec.t];
    row.se_predicted_mse = trace.predicted_mse[rec.t];
    row.se_residual = trace.lambda2[rec.t] - sw2;
    row.eff_obs_gap = relative_gap(row.eff_obs_loss, row.se_lambda2);
    row.estimate_gap = relative_gap(row.estimate_loss, row.se_predicted_mse);
    row.residual_gap = relative_gap(row.residual_loss, row.se_residual);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace ampsi
