#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ampsi/amp_engine.hpp"
#include "ampsi/linear_model.hpp"
#include "ampsi/state_evolution.hpp"

namespace ampsi {

/// (1/k) sum_i loss(a[i], b[i]).
template <class Loss>
double averaged_loss(Loss&& loss, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("averaged_loss: length mismatch");
  if (a.empty()) throw std::invalid_argument("averaged_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += loss(a[i], b[i]);
  return acc / static_cast<double>(a.size());
}

/// (1/k) sum_i loss(a[i], b[i], c[i]).
template <class Loss>
double averaged_loss(Loss&& loss, std::span<const double> a, std::span<const double> b,
                     std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw std::invalid_argument("averaged_loss: length mismatch");
  if (a.empty()) throw std::invalid_argument("averaged_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += loss(a[i], b[i], c[i]);
  return acc / static_cast<double>(a.size());
}

/// |empirical - predicted| / max(|predicted|, 1e-12).
double relative_gap(double empirical, double predicted);

/// One iteration of empirical losses next to their large-system predictions.
struct Pl2Row {
  std::size_t t;
  double eff_obs_loss;        // (1/n) ||s^t - x||^2      -> lambda_t^2
  double estimate_loss;       // (1/n) ||x^{t+1} - x||^2  -> delta (lambda_{t+1}^2 - sigma_w2)
  double residual_loss;       // (1/m) ||r^t - w||^2      -> lambda_t^2 - sigma_w2
  double se_lambda2;
  double se_predicted_mse;
  double se_residual;
  double eff_obs_gap;
  double estimate_gap;
  double residual_gap;
};

struct Pl2Report {
  std::vector<Pl2Row> rows;

  double max_estimate_gap() const;
  bool all_finite_nonnegative() const;
};

/// Pairs every recorded iteration with the trace. The trace must cover
/// lambda2[t + 1] for the last recorded t.
Pl2Report corollary_checks(const AmpRun& run, const ProblemInstance& inst, const SeTrace& trace);

}  // namespace ampsi
