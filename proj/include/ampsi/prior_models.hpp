#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ampsi {

/// Random stream used everywhere in the library. Always passed explicitly.
using Rng = std::mt19937_64;

/// Gaussian signal, SI = signal + N(0, sigma_si2).
struct GGPrior {
  double sigma_x2 = 1.0;
  double sigma_si2 = 0.0;
};

/// Bernoulli-Gaussian signal: 0 w.p. 1 - epsilon, N(0, 1) otherwise.
/// SI = signal + N(0, sigma_si2).
struct BGPrior {
  double epsilon = 1.0;
  double sigma_si2 = 1.0;
};

/// Joint law of (X, X~). Immutable once constructed; the factories validate
/// the parameter ranges and throw std::invalid_argument naming the field.
class PriorModel {
 public:
  static PriorModel gaussian(double sigma_x2, double sigma_si2);
  static PriorModel bernoulli_gaussian(double epsilon, double sigma_si2);

  bool is_gg() const { return std::holds_alternative<GGPrior>(params_); }
  bool is_bg() const { return std::holds_alternative<BGPrior>(params_); }
  const GGPrior& gg() const;
  const BGPrior& bg() const;
  const std::variant<GGPrior, BGPrior>& params() const { return params_; }

  /// "gg" or "bg".
  std::string tag() const { return is_gg() ? "gg" : "bg"; }

  /// E[X^2].
  double second_moment() const;
  /// E[X~^2] = E[X^2] + sigma_si2.
  double si_second_moment() const;
  /// E[X X~] = E[X^2].
  double cross_moment() const;
  /// Variance of the additive SI noise.
  double si_noise_variance() const;

 private:
  explicit PriorModel(std::variant<GGPrior, BGPrior> p) : params_(p) {}
  std::variant<GGPrior, BGPrior> params_;
};

double second_moment(const PriorModel& prior);

/// Draws one (x, x~) pair at a time. Per coordinate the stream is consumed as
/// [bernoulli (BG only)], signal normal, SI-noise normal.
class JointSampler {
 public:
  explicit JointSampler(const PriorModel& prior);
  std::pair<double, double> operator()(Rng& rng);

 private:
  bool sparse_;
  double signal_sd_;
  double si_sd_;
  std::bernoulli_distribution support_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct JointSample {
  std::vector<double> signal;
  std::vector<double> si;
};

JointSample sample_joint(const PriorModel& prior, std::size_t n, Rng& rng);

}  // namespace ampsi
