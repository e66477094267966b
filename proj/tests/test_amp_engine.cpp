#include <stdexcept>
#include <cmath>

#include "ampsi/amp_engine.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ampsi;

namespace {

ProblemInstance make(std::size_t n, std::size_t m, double sw2, const PriorModel& prior, std::uint64_t seed) {
  ModelConfig c;
  c.n = n;
  c.m = m;
  c.sigma_w2 = sw2;
  c.prior = prior;
  c.seed = seed;
  return generate_instance(c);
}

}  // namespace

TEST_CASE("initial state") {
  const auto inst = make(4, 3, 0.01, PriorModel::gaussian(1.0, 0.04), 5);
  const auto st = amp_init(inst);
  CHECK(st.t == 0);
  CHECK(st.x == std::vector<double>(4, 0.0));
  CHECK(st.r == inst.y);
  const auto s_ref = oracle::matvec_t(inst.A, inst.y);
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(st.s[j] - s_ref[j]) < 1e-12);

  auto zero = assemble_instance(inst.config, inst.A, std::vector<double>(4, 0.0), inst.x_tilde,
                                std::vector<double>(3, 0.0));
  CHECK(amp_init(zero).r == std::vector<double>(3, 0.0));
}

TEST_CASE("zero denoiser keeps the residual at y") {
  const auto inst = make(40, 20, 0.1, PriorModel::gaussian(1.0, 0.04), 1);
  SeparableDenoiser zero{[](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
  auto st = amp_init(inst);
  for (int t = 0; t < 5; ++t) {
    st = amp_step(st, inst, zero);
    CHECK(st.x == std::vector<double>(40, 0.0));
    CHECK(st.r == inst.y);
  }
}

TEST_CASE("identity denoiser gives Onsager coefficient n/m") {
  const auto inst = make(40, 20, 0.1, PriorModel::gaussian(1.0, 0.04), 1);
  SeparableDenoiser ident{[](double a, double) { return a; }, [](double, double) { return 1.0; }};
  const auto st = amp_step(amp_init(inst), inst, ident);
  CHECK(st.onsager_coeff == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("engine agrees with a naive transcription") {
  const auto inst = make(1000, 300, 0.01, PriorModel::gaussian(1.0, 0.04), 2);
  const auto trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.01}, 6, ClosedForm{});
  AmpConfig cfg;
  cfg.max_iters = 4;
  cfg.se_trace = trace;
  const auto run = run_amp(inst, cfg);
  const auto ref = oracle::naive_gg_amp(inst, 1.0, 0.04, trace.lambda2, 4);
  for (std::size_t t = 0; t < 4; ++t) CHECK(std::abs(run.records[t].estimate_mse - ref[t]) < 1e-10);
}

TEST_CASE("perfect side information and noiseless measurements") {
  const auto inst = make(200, 60, 0.0, PriorModel::gaussian(1.0, 0.0), 3);
  AmpConfig cfg;
  cfg.max_iters = 1;
  cfg.se_trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.0}, 1, ClosedForm{});
  const auto run = run_amp(inst, cfg);
  CHECK(run.records[0].estimate_mse < 1e-28);
}

TEST_CASE("runs are bit-reproducible") {
  const auto inst = make(500, 150, 0.01, PriorModel::bernoulli_gaussian(0.2, 0.04), 4);
  AmpConfig cfg;
  cfg.max_iters = 6;
  cfg.se_trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.01}, 6, MonteCarlo{10'000, 1});
  const auto a = run_amp(inst, cfg);
  const auto b = run_amp(inst, cfg);
  for (std::size_t t = 0; t < 6; ++t) {
    CHECK(a.records[t].estimate_mse == b.records[t].estimate_mse);
    CHECK(a.records[t].residual_loss == b.records[t].residual_loss);
  }
  CHECK(a.final_state.x == b.final_state.x);
}

TEST_CASE("configuration errors and divergence") {
  const auto inst = make(50, 20, 0.01, PriorModel::gaussian(1.0, 0.04), 4);
  AmpConfig cfg;
  cfg.max_iters = 5;
  CHECK_THROWS_AS(run_amp(inst, cfg), std::invalid_argument);
  cfg.se_trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.01}, 2, ClosedForm{});
  CHECK_THROWS_AS(run_amp(inst, cfg), std::invalid_argument);
  cfg.max_iters = 0;
  CHECK_THROWS_AS(run_amp(inst, cfg), std::invalid_argument);

  SeparableDenoiser bad{[](double, double) { return NAN; }, [](double, double) { return 0.0; }};
  auto st = amp_step(amp_init(inst), inst, SeparableDenoiser{[](double a, double) { return a; },
                                                             [](double, double) { return 1.0; }});
  try {
    amp_step(st, inst, bad);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() == 1);
  }
}

TEST_CASE("early stop at SE convergence") {
  const auto inst = make(300, 90, 0.01, PriorModel::gaussian(1.0, 0.04), 6);
  AmpConfig cfg;
  cfg.max_iters = 25;
  cfg.se_trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.01}, 25, ClosedForm{});
  cfg.early_stop_tol = 1e-8;
  CHECK(run_amp(inst, cfg).records.size() == 14);
}

TEST_CASE("empirical lambda follows the SE prediction") {
  const auto inst = make(4000, 1200, 0.01, PriorModel::gaussian(1.0, 0.04), 7);
  const auto trace = run_se(SeParams{inst.config.prior, inst.delta(), 0.01}, 10, ClosedForm{});
  AmpConfig cfg;
  cfg.max_iters = 10;
  cfg.lambda_source = LambdaSource::empirical;
  const auto run = run_amp(inst, cfg);
  REQUIRE(run.records.size() == 10);
  for (std::size_t t = 2; t < 10; ++t) {
    CHECK(std::abs(run.records[t].lambda2 - trace.lambda2[t]) / trace.lambda2[t] < 0.1);
    CHECK(std::abs(run.records[t].estimate_mse - trace.predicted_mse[t]) / trace.predicted_mse[t] < 0.1);
  }
}
