#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "ampsi/prior_models.hpp"

namespace ampsi {

struct SeParams {
  PriorModel prior = PriorModel::gaussian(1.0, 0.0);
  double delta = 1.0;
  double sigma_w2 = 0.0;
};

/// lambda2[t] for t = 0..T and predicted_mse[t] = delta (lambda2[t+1] - sigma_w2)
/// for t = 0..T-1. std_error[t] is the Monte-Carlo standard error of lambda2[t]
/// (zero for closed-form entries and for t = 0).
struct SeTrace {
  std::vector<double> lambda2;
  std::vector<double> predicted_mse;
  std::vector<double> std_error;
  SeParams params;

  std::size_t steps() const { return lambda2.empty() ? 0 : lambda2.size() - 1; }
  /// lambda2[t] >= sigma_w2 for every t.
  bool above_noise_floor() const;
  /// lambda2[t+1] <= lambda2[t] + slack_se * hypot(se[t], se[t+1]) for every t.
  bool non_increasing(double slack_se = 0.0) const;
  /// First t >= 1 with |lambda2[t] - lambda2[t-1]| / lambda2[t-1] < tol, or
  /// steps() + 1 if never reached.
  std::size_t convergence_index(double tol = 1e-8) const;
};

/// lambda_0^2 = sigma_w2 + E[X^2] / delta.
double se_init(const PriorModel& prior, double delta, double sigma_w2);

/// Closed-form GG recursion step.
double gg_se_step(double lambda2_prev, const SeParams& params);

struct McEstimate {
  double value;
  double std_error;
};

/// sigma_w2 + E[(eta_{t-1}(X + lambda_{t-1} Z, X~) - X)^2] / delta by direct
/// sampling. n_samples must be >= 1000.
McEstimate mc_se_step(double lambda2_prev, const SeParams& params, std::size_t n_samples,
                      Rng& rng);

struct ClosedForm {};

struct MonteCarlo {
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Reuse one (X, X~, Z) sample set for every step instead of fresh draws.
  bool common_random_numbers = false;
};

using SeBackend = std::variant<ClosedForm, MonteCarlo>;

/// Runs T >= 1 steps. ClosedForm is only valid for the GG prior; requesting it
/// for BG throws std::invalid_argument. Fresh-draw Monte-Carlo step t uses a
/// stream seeded from (seed, t).
SeTrace run_se(const SeParams& params, std::size_t T, const SeBackend& backend);

}  // namespace ampsi
