#include <stdexcept>
#include <cmath>
#include <random>
#include <vector>

#include "ampsi/denoisers.hpp"
#include "ampsi/state_evolution.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ampsi;

namespace {

DenoiserContext gg(double sx2, double s2, double l2) {
  return DenoiserContext(l2, PriorModel::gaussian(sx2, s2));
}
DenoiserContext bg(double eps, double s2, double l2) {
  return DenoiserContext(l2, PriorModel::bernoulli_gaussian(eps, s2));
}

double central_diff_a(const DenoiserContext& c, double a, double b, double h = 1e-6) {
  return (denoise(c, a + h, b) - denoise(c, a - h, b)) / (2 * h);
}

// T from the ratio-of-densities form, no log space.
double bg_direct(double eps, double s2, double l2, double a, double b) {
  auto pdf = [](double x, double var) {
    return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
  };
  const double T = (1 - eps) * pdf(a, l2) * pdf(b, s2) /
                   (eps * pdf(b, 1 + s2) * pdf(b / (1 + s2) - a, s2 / (1 + s2) + l2));
  return (s2 * a + l2 * b) / (s2 + l2 + s2 * l2) / (1 + T);
}

}  // namespace

TEST_CASE("GG denoiser closed form") {
  CHECK(gg_denoise(gg(1.0, 0.0, 0.7), 3.0, -1.25) == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(gg_denoise(gg(2.0, 0.3, 0.7), 0.0, 0.0) == 0.0);
  const auto c = gg(1.0, 0.04, 3.34333);
  CHECK(std::abs(gg_denoise(c, 1.0, 1.0) - 3.38333 / 3.51707) < 2e-6);
  CHECK(std::abs(gg_denoise(c, 1.0, 1.0) - 0.96197) < 1e-5);
  // Quadrature confirms the closed form.
  for (double a : {-2.0, 0.3, 4.0})
    for (double b : {-1.0, 0.9}) {
      const auto q = oracle::posterior(1.0, 1.0, 0.04, 3.34333, a, b);
      CHECK(std::abs(gg_denoise(c, a, b) - q.mean) < 1e-9);
    }
  const auto c2 = gg(2.5, 0.3, 0.2);
  const auto q = oracle::posterior(1.0, 2.5, 0.3, 0.2, 1.7, -0.4);
  CHECK(std::abs(gg_denoise(c2, 1.7, -0.4) - q.mean) < 1e-9);
}

TEST_CASE("GG derivative in a") {
  CHECK(gg_deriv_a(gg(1.0, 0.0, 0.5), 1.0, 2.0) == 0.0);
  const double l2 = 0.5;
  CHECK(std::abs(gg_deriv_a(gg(1.0, 1e6, l2), 0.0, 0.0) - 1.0 / (1.0 + l2)) < 1e-4);
  CHECK(std::abs(gg_deriv_a(gg(1.0, 0.04, 3.34333), 0.3, 9.0) - 0.04 / 3.51707) < 1e-7);
  CHECK(gg_deriv_a(gg(1.0, 0.04, 3.34333), 0.3, 9.0) ==
        gg_deriv_a(gg(1.0, 0.04, 3.34333), -8.0, 1.0));
}

TEST_CASE("GG partials are bounded by one") {
  for (double sx2 : {0.1, 1.0, 10.0})
    for (double s2 : {0.0, 0.01, 1.0, 100.0})
      for (double l2 : {1e-4, 0.1, 3.0, 1e3}) {
        const auto c = gg(sx2, s2, l2);
        CHECK(gg_deriv_a(c, 0, 0) <= 1.0);
        CHECK(gg_deriv_a(c, 0, 0) >= 0.0);
        CHECK(gg_deriv_b(c, 0, 0) <= 1.0);
        CHECK(gg_deriv_b(c, 0, 0) >= 0.0);
      }
}

TEST_CASE("BG with epsilon = 1 reduces to GG with unit signal variance") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    const double l2 = 0.01 + std::abs(u(rng)) / 10;
    const auto cb = bg(1.0, 0.25, l2);
    const auto cg = gg(1.0, 0.25, l2);
    REQUIRE(std::abs(bg_denoise(cb, a, b) - gg_denoise(cg, a, b)) <= 1e-12);
    REQUIRE(bg_deriv_a(cb, a, b) == doctest::Approx(0.25 / (0.25 + l2 + 0.25 * l2)).epsilon(1e-14));
  }
}

TEST_CASE("BG denoiser against the quadrature posterior") {
  CHECK(bg_denoise(bg(0.2, 0.04, 1.0), 0.0, 0.0) == 0.0);
  const auto c = bg(0.2, 0.04, 0.5);
  const auto q = oracle::posterior(0.2, 1.0, 0.04, 0.5, 1.0, 0.9);
  CHECK(std::abs(bg_denoise(c, 1.0, 0.9) - q.mean) < 1e-8);
  CHECK(std::abs(bg_posterior_nonzero(c, 1.0, 0.9) - q.p_nonzero) < 1e-8);
  for (double a : {-7.0, -0.5, 0.0, 0.2, 3.0})
    for (double b : {-2.0, 0.05, 1.5}) {
      const auto qq = oracle::posterior(0.1, 1.0, 0.25, 0.3, a, b);
      const auto cc = bg(0.1, 0.25, 0.3);
      CHECK(std::abs(bg_denoise(cc, a, b) - qq.mean) < 1e-8);
      CHECK(std::abs(bg_posterior_nonzero(cc, a, b) - qq.p_nonzero) < 1e-8);
    }
}

TEST_CASE("BG posterior nonzero probability") {
  const auto c = bg(0.2, 0.04, 0.5);
  // Along a = b = v the statistic u grows with |v|.
  double prev = bg_posterior_nonzero(c, 0.0, 0.0);
  for (double v = 0.05; v < 20; v += 0.05) {
    const double p = bg_posterior_nonzero(c, v, v);
    CHECK(p >= prev);
    CHECK(bg_posterior_nonzero(c, -v, -v) == doctest::Approx(p).epsilon(1e-14));
    prev = p;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(bg_log_T(c, 1e3, -1e3)));

  double prev_log_t = bg_log_T(bg(0.5, 0.04, 0.5), 0.3, 0.1);
  for (double eps : {0.9, 0.99, 0.9999, 1 - 1e-12}) {
    const double lt = bg_log_T(bg(eps, 0.04, 0.5), 0.3, 0.1);
    CHECK(lt < prev_log_t);
    prev_log_t = lt;
  }
  CHECK(bg_posterior_nonzero(bg(1 - 1e-12, 0.04, 0.5), 0.3, 0.1) > 1 - 1e-10);
  CHECK(bg_log_T(bg(1.0, 0.04, 0.5), 0.3, 0.1) == -INFINITY);
  CHECK(bg_posterior_nonzero(bg(1.0, 0.04, 0.5), 0.3, 0.1) == 1.0);

  const auto q = bg_intermediates(c, 0.7, -0.2);
  CHECK(q.nu_t == doctest::Approx(0.04 * 0.5 * (0.04 + 0.5 + 0.02)));
  CHECK(q.p_nonzero == doctest::Approx(1 / (1 + std::exp(q.log_T))));
  CHECK(q.p_nonzero + q.p_zero == doctest::Approx(1.0));
}

TEST_CASE("BG denoiser is finite for large arguments and rejects NaN") {
  const auto c = bg(0.2, 0.04, 0.05);
  for (double a : {-1e3, -50.0, 0.0, 50.0, 1e3})
    for (double b : {-1e3, -50.0, 0.0, 50.0, 1e3}) {
      CHECK(std::isfinite(bg_denoise(c, a, b)));
      CHECK(std::isfinite(bg_deriv_a(c, a, b)));
      CHECK(std::isfinite(bg_deriv_b(c, a, b)));
    }
  CHECK_THROWS_AS(bg_denoise(c, NAN, 0.0), std::domain_error);
  CHECK_THROWS_AS(bg_denoise(gg(1.0, 0.1, 0.5), 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DenoiserContext(0.0, PriorModel::gaussian(1.0, 0.1)), std::invalid_argument);
}

TEST_CASE("log-domain and direct BG evaluation agree where the direct form is finite") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(-6, 6);
  int compared = 0;
  for (int i = 0; i < 5000; ++i) {
    const double a = u(rng), b = u(rng);
    const double eps = 0.05 + 0.9 * std::abs(u(rng)) / 6;
    const double s2 = 0.04 + std::abs(u(rng)) / 6;
    const double l2 = 0.05 + std::abs(u(rng)) / 2;
    const double direct = bg_direct(eps, s2, l2, a, b);
    if (!std::isfinite(direct)) continue;
    ++compared;
    const double logd = bg_denoise(bg(eps, s2, l2), a, b);
    REQUIRE(std::abs(direct - logd) <= 1e-12 * std::max(1.0, std::abs(logd)));
  }
  CHECK(compared > 4000);
}

TEST_CASE("analytic derivatives match central differences") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 3000; ++i) {
    const double a = -5 + 10 * u(rng), b = -5 + 10 * u(rng);
    const double l2 = 0.05 + 2 * u(rng);
    const double s2 = 0.04 + u(rng);
    const auto c = bg(0.05 + 0.95 * u(rng), s2, l2);
    const double an = bg_deriv_a(c, a, b);
    REQUIRE(std::abs(an - central_diff_a(c, a, b)) <= 1e-6 * std::abs(an));
    const double h = 1e-6;
    const double fd_b = (bg_denoise(c, a, b + h) - bg_denoise(c, a, b - h)) / (2 * h);
    const double an_b = bg_deriv_b(c, a, b);
    REQUIRE(std::abs(an_b - fd_b) <= 1e-6 * std::abs(an_b));
  }
}

TEST_CASE("BG partial derivative bounds along a state-evolution trace") {
  const double eps = 0.2, sw2 = 0.01;
  for (double s2 : {0.04, 0.25, 1.0}) {
    const SeParams p{PriorModel::bernoulli_gaussian(eps, s2), 0.3, sw2};
    const auto trace = run_se(p, 12, MonteCarlo{20'000, 5});
    const double bound_a = 1 + 2 * (1 - eps) / (std::sqrt(sw2) * eps);
    const double bound_b = 1 + 2 * (1 - eps) / (std::sqrt(s2) * eps);
    CHECK(bound_a == doctest::Approx(81.0));
    double sup_a = 0.0, sup_b = 0.0;
    for (double l2 : trace.lambda2) {
      const auto c = bg(eps, s2, l2);
      for (double a = -20; a <= 20; a += 0.1)
        for (double b = -20; b <= 20; b += 0.1) {
          sup_a = std::max(sup_a, std::abs(bg_deriv_a(c, a, b)));
          sup_b = std::max(sup_b, std::abs(bg_deriv_b(c, a, b)));
        }
    }
    CHECK(sup_a <= bound_a);
    CHECK(sup_b <= bound_b);
  }
}

TEST_CASE("denoisers grow at most linearly") {
  for (const auto& c : {gg(1.0, 0.04, 0.2), gg(3.0, 1.0, 5.0), bg(0.2, 0.04, 0.1), bg(0.6, 1.0, 2.0)}) {
    double growth = 0.0;
    for (double a = -50; a <= 50; a += 0.5)
      for (double b = -50; b <= 50; b += 0.5)
        growth = std::max(growth, std::abs(denoise(c, a, b)) / (1 + std::abs(a) + std::abs(b)));
    CHECK(std::isfinite(growth));
    CHECK(growth <= 1.0);
  }
}

TEST_CASE("posterior mean beats the raw observation and the raw SI") {
  for (const auto& prior : {PriorModel::gaussian(1.0, 0.25), PriorModel::bernoulli_gaussian(0.2, 0.25)}) {
    const double l2 = 0.3;
    const DenoiserContext c(l2, prior);
    JointSampler draw(prior);
    Rng rng(123);
    std::normal_distribution<double> nd;
    const std::size_t n = 1'000'000;
    double d_a = 0, d_a2 = 0, d_b = 0, d_b2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, xt] = draw(rng);
      const double a = x + std::sqrt(l2) * nd(rng);
      const double e = (denoise(c, a, xt) - x) * (denoise(c, a, xt) - x);
      const double da = e - (a - x) * (a - x);
      const double db = e - (xt - x) * (xt - x);
      d_a += da;
      d_a2 += da * da;
      d_b += db;
      d_b2 += db * db;
    }
    const double ma = d_a / n, mb = d_b / n;
    const double sa = std::sqrt((d_a2 / n - ma * ma) / n), sb = std::sqrt((d_b2 / n - mb * mb) / n);
    CHECK(ma <= 3 * sa);
    CHECK(mb <= 3 * sb);
    CHECK(ma < 0);
    CHECK(mb < 0);
  }
}

TEST_CASE("vector helpers agree with the scalar functions") {
  const auto c = bg(0.3, 0.1, 0.4);
  std::vector<double> a{-1, 0, 2.5}, b{0.5, -0.2, 2}, out(3);
  denoise_into(c, a, b, out);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(out[i] == bg_denoise(c, a[i], b[i]));
    sum += bg_deriv_a(c, a[i], b[i]);
  }
  CHECK(sum_deriv_a(c, a, b) == sum);
  std::vector<double> short_b{1.0};
  CHECK_THROWS_AS(sum_deriv_a(c, a, short_b), std::invalid_argument);
}
