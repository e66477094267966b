#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ampsi/denoisers.hpp"
#include "ampsi/linear_model.hpp"
#include "ampsi/state_evolution.hpp"

namespace ampsi {

/// Non-finite values appeared in the iterate or residual.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error("AMP diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

enum class LambdaSource { se_prescribed, empirical };

struct AmpConfig {
  std::size_t max_iters = 30;
  LambdaSource lambda_source = LambdaSource::se_prescribed;
  /// Required when lambda_source is se_prescribed; needs lambda2.size() >= max_iters.
  std::optional<SeTrace> se_trace;
  /// Stop once the prescribed lambda2 changes by less than this relative amount.
  std::optional<double> early_stop_tol;
  /// Disable only to demonstrate what the memory term buys.
  bool onsager = true;
};

/// Iteration t holds x^t, r^t and the effective observation s^t = x^t + A^T r^t.
struct AmpState {
  std::size_t t = 0;
  std::vector<double> x;
  std::vector<double> r;
  std::vector<double> s;
  /// (1/m) sum_i eta_{t-1}'(s^{t-1}_i, x~_i), the multiplier that formed r^t.
  double onsager_coeff = 0.0;
  /// ||r^t||^2 / m recorded once per iteration.
  std::vector<double> lambda2_track;
};

/// Any coordinate-wise denoiser with its partial derivative in the first argument.
struct SeparableDenoiser {
  std::function<double(double, double)> eta;
  std::function<double(double, double)> eta_prime;
};

/// x^0 = 0, r^0 = y (the memory term is zero at t = 0), s^0 = A^T y.
AmpState amp_init(const ProblemInstance& inst);

/// One iteration using eta_t given by ctx:
///   x^{t+1} = eta_t(s^t, x~)
///   r^{t+1} = y - A x^{t+1} + r^t (1/m) sum_i eta_t'(s^t_i, x~_i)
///   s^{t+1} = x^{t+1} + A^T r^{t+1}
/// Throws DivergenceError on non-finite output.
AmpState amp_step(const AmpState& state, const ProblemInstance& inst, const DenoiserContext& ctx,
                  bool onsager = true);
AmpState amp_step(const AmpState& state, const ProblemInstance& inst,
                  const SeparableDenoiser& denoiser, bool onsager = true);

struct IterationRecord {
  std::size_t t;
  double lambda2;        // channel variance used by eta_t
  double estimate_mse;   // (1/n) ||x^{t+1} - x||^2
  double eff_obs_loss;   // (1/n) ||s^t - x||^2
  double residual_loss;  // (1/m) ||r^t - w||^2
  double onsager_coeff;  // (1/m) sum_i eta_t'(s^t_i, x~_i)
};

struct AmpRun {
  AmpState final_state;
  std::vector<IterationRecord> records;
};

/// Runs max_iters iterations (fewer with early stop) and records t = 0..max_iters-1.
AmpRun run_amp(const ProblemInstance& inst, const AmpConfig& config);

}  // namespace ampsi
