#include "ampsi/denoisers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ampsi {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("length mismatch in ") + what);
}

// 1 / (1 + exp(-x)) without overflow.
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gg_denominator(const GGPrior& p, double lambda2) {
  return p.sigma_x2 * (p.sigma_si2 + lambda2) + p.sigma_si2 * lambda2;
}

}  // namespace

DenoiserContext::DenoiserContext(double lambda2, PriorModel prior)
    : lambda2_(lambda2), prior_(std::move(prior)) {
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2))
    throw std::invalid_argument("lambda2 must be finite and > 0, got " + std::to_string(lambda2));
}

double gg_denoise(const DenoiserContext& ctx, double a, double b) {
  const auto& p = ctx.prior().gg();
  const double l2 = ctx.lambda2();
  return (p.sigma_x2 * p.sigma_si2 * a + p.sigma_x2 * l2 * b) / gg_denominator(p, l2);
}

double gg_deriv_a(const DenoiserContext& ctx, double, double) {
  const auto& p = ctx.prior().gg();
  return p.sigma_x2 * p.sigma_si2 / gg_denominator(p, ctx.lambda2());
}

double gg_deriv_b(const DenoiserContext& ctx, double, double) {
  const auto& p = ctx.prior().gg();
  return p.sigma_x2 * ctx.lambda2() / gg_denominator(p, ctx.lambda2());
}

BgIntermediates bg_intermediates(const DenoiserContext& ctx, double a, double b) {
  if (std::isnan(a) || std::isnan(b)) throw std::domain_error("bg denoiser called with NaN input");
  const auto& p = ctx.prior().bg();
  const double s2 = p.sigma_si2;
  const double l2 = ctx.lambda2();
  const double D = s2 + l2 + s2 * l2;
  const double nu = s2 * l2 * D;
  const double u = s2 * a + l2 * b;

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double log_prior_odds = std::log1p(-p.epsilon) - std::log(p.epsilon);
  const double log_scale = std::log(nu) + 0.5 * std::log(two_pi) - std::log(l2 * s2);
  const double log_rho = -0.5 * std::log(two_pi * nu) - u * u / (2.0 * nu);
  const double log_T = log_prior_odds + log_scale + log_rho;

  BgIntermediates out;
  out.log_T = log_T;
  out.f_ab = u / D;
  out.nu_t = nu;
  out.p_nonzero = logistic(-log_T);
  out.p_zero = logistic(log_T);
  out.u = u;
  out.D = D;
  return out;
}

double bg_log_T(const DenoiserContext& ctx, double a, double b) {
  return bg_intermediates(ctx, a, b).log_T;
}

double bg_posterior_nonzero(const DenoiserContext& ctx, double a, double b) {
  return bg_intermediates(ctx, a, b).p_nonzero;
}

double bg_denoise(const DenoiserContext& ctx, double a, double b) {
  const auto q = bg_intermediates(ctx, a, b);
  return q.p_nonzero * q.f_ab;
}

// d eta/d a = p df/da - p (1 - p) f dlogT/da, with dlogT/da = -sigma2 u / nu.
double bg_deriv_a(const DenoiserContext& ctx, double a, double b) {
  const auto q = bg_intermediates(ctx, a, b);
  const double s2 = ctx.prior().bg().sigma_si2;
  return q.p_nonzero * s2 / q.D + q.p_nonzero * q.p_zero * s2 * q.u * q.f_ab / q.nu_t;
}

double bg_deriv_b(const DenoiserContext& ctx, double a, double b) {
  const auto q = bg_intermediates(ctx, a, b);
  const double l2 = ctx.lambda2();
  return q.p_nonzero * l2 / q.D + q.p_nonzero * q.p_zero * l2 * q.u * q.f_ab / q.nu_t;
}

double denoise(const DenoiserContext& ctx, double a, double b) {
  return ctx.prior().is_gg() ? gg_denoise(ctx, a, b) : bg_denoise(ctx, a, b);
}

double deriv_a(const DenoiserContext& ctx, double a, double b) {
  return ctx.prior().is_gg() ? gg_deriv_a(ctx, a, b) : bg_deriv_a(ctx, a, b);
}

double deriv_b(const DenoiserContext& ctx, double a, double b) {
  return ctx.prior().is_gg() ? gg_deriv_b(ctx, a, b) : bg_deriv_b(ctx, a, b);
}

void denoise_into(const DenoiserContext& ctx, std::span<const double> a,
                  std::span<const double> b, std::span<double> out) {
  require_same_size(a.size(), b.size(), "denoise_into");
  require_same_size(a.size(), out.size(), "denoise_into");
  if (ctx.prior().is_gg()) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = gg_denoise(ctx, a[i], b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = bg_denoise(ctx, a[i], b[i]);
  }
}

double sum_deriv_a(const DenoiserContext& ctx, std::span<const double> a,
                   std::span<const double> b) {
  require_same_size(a.size(), b.size(), "sum_deriv_a");
  double acc = 0.0;
  if (ctx.prior().is_gg()) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += gg_deriv_a(ctx, a[i], b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) acc += bg_deriv_a(ctx, a[i], b[i]);
  }
  return acc;
}

}  // namespace ampsi
