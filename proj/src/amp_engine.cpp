#include "ampsi/amp_engine.hpp"

#include <cmath>

namespace ampsi {

namespace {

double mean_sq_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double mean_sq(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc / static_cast<double>(a.size());
}

bool all_finite(std::span<const double> v) {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

}  // namespace

AmpState amp_init(const ProblemInstance& inst) {
  AmpState st;
  st.t = 0;
  st.x.assign(inst.n(), 0.0);
  st.r = inst.y;
  st.s = adjoint(inst.A, st.r);
  st.lambda2_track.push_back(mean_sq(st.r));
  return st;
}

namespace {

template <class Denoise, class SumDeriv>
AmpState step_impl(const AmpState& state, const ProblemInstance& inst, Denoise&& denoise,
                   SumDeriv&& sum_deriv, bool onsager) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  AmpState next;
  next.t = state.t + 1;
  next.lambda2_track = state.lambda2_track;

  next.x.resize(n);
  denoise(state.s, next.x);
  if (!all_finite(next.x)) throw DivergenceError(state.t, "non-finite estimate");

  const double coeff = onsager ? sum_deriv(state.s) / static_cast<double>(m) : 0.0;
  next.onsager_coeff = coeff;
  next.r = forward(inst.A, next.x);
  for (std::size_t i = 0; i < m; ++i) next.r[i] = inst.y[i] - next.r[i] + coeff * state.r[i];
  if (!all_finite(next.r)) throw DivergenceError(state.t, "non-finite residual");

  next.s = adjoint(inst.A, next.r);
  for (std::size_t i = 0; i < n; ++i) next.s[i] += next.x[i];
  next.lambda2_track.push_back(mean_sq(next.r));
  return next;
}

}  // namespace

AmpState amp_step(const AmpState& state, const ProblemInstance& inst, const DenoiserContext& ctx,
                  bool onsager) {
  return step_impl(
      state, inst,
      [&](std::span<const double> s, std::span<double> out) {
        denoise_into(ctx, s, inst.x_tilde, out);
      },
      [&](std::span<const double> s) { return sum_deriv_a(ctx, s, inst.x_tilde); }, onsager);
}

AmpState amp_step(const AmpState& state, const ProblemInstance& inst,
                  const SeparableDenoiser& denoiser, bool onsager) {
  return step_impl(
      state, inst,
      [&](std::span<const double> s, std::span<double> out) {
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = denoiser.eta(s[i], inst.x_tilde[i]);
      },
      [&](std::span<const double> s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) acc += denoiser.eta_prime(s[i], inst.x_tilde[i]);
        return acc;
      },
      onsager);
}

AmpRun run_amp(const ProblemInstance& inst, const AmpConfig& config) {
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  const bool prescribed = config.lambda_source == LambdaSource::se_prescribed;
  if (prescribed) {
    if (!config.se_trace) throw std::invalid_argument("se-prescribed lambda requires an SE trace");
    if (config.se_trace->lambda2.size() < config.max_iters)
      throw std::invalid_argument("SE trace shorter than max_iters");
  }

  AmpRun run;
  AmpState st = amp_init(inst);
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    const double lambda2 = prescribed ? config.se_trace->lambda2[t] : st.lambda2_track.back();
    if (prescribed && config.early_stop_tol && t > 0) {
      const double prev = config.se_trace->lambda2[t - 1];
      if (std::abs(lambda2 - prev) / prev < *config.early_stop_tol) break;
    }
    const DenoiserContext ctx(lambda2, inst.config.prior);

    IterationRecord rec{};
    rec.t = t;
    rec.lambda2 = lambda2;
    rec.eff_obs_loss = mean_sq_diff(st.s, inst.x);
    rec.residual_loss = mean_sq_diff(st.r, inst.w);
    st = amp_step(st, inst, ctx, config.onsager);
    rec.onsager_coeff = st.onsager_coeff;
    rec.estimate_mse = mean_sq_diff(st.x, inst.x);
    run.records.push_back(rec);
  }
  run.final_state = std::move(st);
  return run;
}

}  // namespace ampsi
