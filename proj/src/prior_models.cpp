#include "ampsi/prior_models.hpp"

#include <cmath>
#include <stdexcept>

namespace ampsi {

PriorModel PriorModel::gaussian(double sigma_x2, double sigma_si2) {
  if (!(sigma_x2 > 0.0) || !std::isfinite(sigma_x2))
    throw std::invalid_argument("sigma_x2 must be finite and > 0");
  if (!(sigma_si2 >= 0.0) || !std::isfinite(sigma_si2))
    throw std::invalid_argument("sigma_si2 must be finite and >= 0");
  return PriorModel(GGPrior{sigma_x2, sigma_si2});
}

PriorModel PriorModel::bernoulli_gaussian(double epsilon, double sigma_si2) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1]");
  // Perfect SI makes the BG posterior degenerate (division by sigma_si2).
  if (!(sigma_si2 > 0.0) || !std::isfinite(sigma_si2))
    throw std::invalid_argument("sigma_si2 must be finite and > 0 for the bg model");
  return PriorModel(BGPrior{epsilon, sigma_si2});
}

const GGPrior& PriorModel::gg() const {
  if (!is_gg()) throw std::invalid_argument("prior is not gg");
  return std::get<GGPrior>(params_);
}

const BGPrior& PriorModel::bg() const {
  if (!is_bg()) throw std::invalid_argument("prior is not bg");
  return std::get<BGPrior>(params_);
}

double PriorModel::second_moment() const {
  return is_gg() ? std::get<GGPrior>(params_).sigma_x2 : std::get<BGPrior>(params_).epsilon;
}

double PriorModel::si_noise_variance() const {
  return is_gg() ? std::get<GGPrior>(params_).sigma_si2 : std::get<BGPrior>(params_).sigma_si2;
}

double PriorModel::si_second_moment() const { return second_moment() + si_noise_variance(); }

double PriorModel::cross_moment() const { return second_moment(); }

double second_moment(const PriorModel& prior) { return prior.second_moment(); }

JointSampler::JointSampler(const PriorModel& prior)
    : sparse_(prior.is_bg()),
      signal_sd_(prior.is_gg() ? std::sqrt(prior.gg().sigma_x2) : 1.0),
      si_sd_(std::sqrt(prior.si_noise_variance())),
      support_(prior.is_bg() ? prior.bg().epsilon : 1.0) {}

std::pair<double, double> JointSampler::operator()(Rng& rng) {
  const bool nonzero = sparse_ ? support_(rng) : true;
  const double g = normal_(rng);
  const double x = nonzero ? signal_sd_ * g : 0.0;
  const double z = normal_(rng);
  return {x, x + si_sd_ * z};
}

JointSample sample_joint(const PriorModel& prior, std::size_t n, Rng& rng) {
  JointSample out;
  out.signal.resize(n);
  out.si.resize(n);
  JointSampler draw(prior);
  for (std::size_t i = 0; i < n; ++i) {
    auto [x, xt] = draw(rng);
    out.signal[i] = x;
    out.si[i] = xt;
  }
  return out;
}

}  // namespace ampsi
