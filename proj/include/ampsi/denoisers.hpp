#pragma once

#include <span>

#include "ampsi/prior_models.hpp"

namespace ampsi {

/// Scalar channel a = X + lambda Z paired with the SI law. lambda2 must be
/// finite and > 0.
class DenoiserContext {
 public:
  DenoiserContext(double lambda2, PriorModel prior);

  double lambda2() const { return lambda2_; }
  const PriorModel& prior() const { return prior_; }

 private:
  double lambda2_;
  PriorModel prior_;
};

// Gaussian-Gaussian posterior mean. Linear in (a, b).
double gg_denoise(const DenoiserContext& ctx, double a, double b);
double gg_deriv_a(const DenoiserContext& ctx, double a, double b);
double gg_deriv_b(const DenoiserContext& ctx, double a, double b);

/// Quantities behind the BG posterior mean eta = p_nonzero * f_ab.
///
/// With u = sigma2 a + lambda2 b and D = sigma2 + lambda2 + sigma2 lambda2:
///   f_ab      = u / D                       (posterior mean given X != 0)
///   nu_t      = sigma2 lambda2 D
///   log_T     = log((1-eps)/eps) + log(nu_t sqrt(2 pi) / (lambda2 sigma2))
///               + log rho_{nu_t}(u)
///   p_nonzero = 1 / (1 + exp(log_T))
/// T is the zero-vs-nonzero likelihood ratio; it is only ever formed in log
/// space so |u| large cannot overflow.
struct BgIntermediates {
  double log_T;
  double f_ab;
  double nu_t;
  double p_nonzero;
  double p_zero;  // 1 - p_nonzero, computed without cancellation
  double u;
  double D;
};

BgIntermediates bg_intermediates(const DenoiserContext& ctx, double a, double b);
double bg_log_T(const DenoiserContext& ctx, double a, double b);
double bg_posterior_nonzero(const DenoiserContext& ctx, double a, double b);
double bg_denoise(const DenoiserContext& ctx, double a, double b);
double bg_deriv_a(const DenoiserContext& ctx, double a, double b);
double bg_deriv_b(const DenoiserContext& ctx, double a, double b);

// Dispatch on the context's prior.
double denoise(const DenoiserContext& ctx, double a, double b);
double deriv_a(const DenoiserContext& ctx, double a, double b);
double deriv_b(const DenoiserContext& ctx, double a, double b);

/// out[i] = eta(a[i], b[i]).
void denoise_into(const DenoiserContext& ctx, std::span<const double> a,
                  std::span<const double> b, std::span<double> out);
/// Sum over i of d eta / d a at (a[i], b[i]), summed in index order.
double sum_deriv_a(const DenoiserContext& ctx, std::span<const double> a,
                   std::span<const double> b);

}  // namespace ampsi
