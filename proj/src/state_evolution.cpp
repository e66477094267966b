#include "ampsi/state_evolution.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "ampsi/denoisers.hpp"

namespace ampsi {

namespace {

void check_params(const SeParams& p) {
  if (!(p.delta > 0.0) || !std::isfinite(p.delta))
    throw std::invalid_argument("delta must be finite and > 0");
  if (!(p.sigma_w2 >= 0.0) || !std::isfinite(p.sigma_w2))
    throw std::invalid_argument("sigma_w2 must be finite and >= 0");
}

// Welford accumulator for the squared error samples.
struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double std_error() const {
    if (count < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

McEstimate finish(const Moments& acc, const SeParams& params) {
  return {params.sigma_w2 + acc.mean / params.delta, acc.std_error() / params.delta};
}

struct SampleSet {
  std::vector<double> x, xt, z;
};

SampleSet draw_samples(const PriorModel& prior, std::size_t k, Rng& rng) {
  SampleSet s;
  s.x.resize(k);
  s.xt.resize(k);
  s.z.resize(k);
  JointSampler joint(prior);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::tie(s.x[i], s.xt[i]) = joint(rng);
    s.z[i] = normal(rng);
  }
  return s;
}

McEstimate mc_step_on(const SampleSet& s, double lambda2_prev, const SeParams& params) {
  const DenoiserContext ctx(lambda2_prev, params.prior);
  const double lambda = std::sqrt(lambda2_prev);
  Moments acc;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double e = denoise(ctx, s.x[i] + lambda * s.z[i], s.xt[i]) - s.x[i];
    acc.add(e * e);
  }
  return finish(acc, params);
}

}  // namespace

bool SeTrace::above_noise_floor() const {
  for (double l : lambda2)
    if (!(l >= params.sigma_w2)) return false;
  return true;
}

bool SeTrace::non_increasing(double slack_se) const {
  for (std::size_t t = 0; t + 1 < lambda2.size(); ++t) {
    const double se = std::hypot(std_error[t], std_error[t + 1]);
    if (lambda2[t + 1] > lambda2[t] + slack_se * se) return false;
  }
  return true;
}

std::size_t SeTrace::convergence_index(double tol) const {
  for (std::size_t t = 1; t < lambda2.size(); ++t)
    if (std::abs(lambda2[t] - lambda2[t - 1]) / lambda2[t - 1] < tol) return t;
  return steps() + 1;
}

double se_init(const PriorModel& prior, double delta, double sigma_w2) {
  check_params({prior, delta, sigma_w2});
  return sigma_w2 + prior.second_moment() / delta;
}

double gg_se_step(double lambda2_prev, const SeParams& params) {
  const auto& p = params.prior.gg();
  const double mmse = p.sigma_x2 * p.sigma_si2 * lambda2_prev /
                      (p.sigma_x2 * (p.sigma_si2 + lambda2_prev) + p.sigma_si2 * lambda2_prev);
  return params.sigma_w2 + mmse / params.delta;
}

McEstimate mc_se_step(double lambda2_prev, const SeParams& params, std::size_t n_samples,
                      Rng& rng) {
  check_params(params);
  if (n_samples < 1000) throw std::invalid_argument("n_samples must be >= 1000");
  const DenoiserContext ctx(lambda2_prev, params.prior);
  const double lambda = std::sqrt(lambda2_prev);
  JointSampler joint(params.prior);
  std::normal_distribution<double> normal(0.0, 1.0);
  Moments acc;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto [x, xt] = joint(rng);
    const double z = normal(rng);
    const double e = denoise(ctx, x + lambda * z, xt) - x;
    acc.add(e * e);
  }
  return finish(acc, params);
}

SeTrace run_se(const SeParams& params, std::size_t T, const SeBackend& backend) {
  check_params(params);
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  SeTrace trace;
  trace.params = params;
  trace.lambda2.reserve(T + 1);
  trace.std_error.reserve(T + 1);
  trace.lambda2.push_back(se_init(params.prior, params.delta, params.sigma_w2));
  trace.std_error.push_back(0.0);

  if (std::holds_alternative<ClosedForm>(backend)) {
    if (!params.prior.is_gg())
      throw std::invalid_argument("closed-form state evolution is only available for the gg model");
    for (std::size_t t = 1; t <= T; ++t) {
      trace.lambda2.push_back(gg_se_step(trace.lambda2.back(), params));
      trace.std_error.push_back(0.0);
    }
  } else {
    const auto& mc = std::get<MonteCarlo>(backend);
    if (mc.n_samples < 1000) throw std::invalid_argument("se_samples must be >= 1000");
    SampleSet shared;
    if (mc.common_random_numbers) {
      Rng rng(mc.seed);
      shared = draw_samples(params.prior, mc.n_samples, rng);
    }
    for (std::size_t t = 1; t <= T; ++t) {
      McEstimate est;
      if (mc.common_random_numbers) {
        est = mc_step_on(shared, trace.lambda2.back(), params);
      } else {
        std::seed_seq seq{static_cast<std::uint32_t>(mc.seed), static_cast<std::uint32_t>(mc.seed >> 32),
                          static_cast<std::uint32_t>(t)};
        Rng rng(seq);
        est = mc_se_step(trace.lambda2.back(), params, mc.n_samples, rng);
      }
      trace.lambda2.push_back(est.value);
      trace.std_error.push_back(est.std_error);
    }
  }

  trace.predicted_mse.reserve(T);
  for (std::size_t t = 0; t < T; ++t)
    trace.predicted_mse.push_back(params.delta * (trace.lambda2[t + 1] - params.sigma_w2));
  return trace;
}

}  // namespace ampsi
