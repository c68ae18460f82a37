#include <doctest.h>

#include <sstream>

#include "otfs/state_evolution.hpp"

using namespace otfs;

namespace {

// Gauss-Hermite nodes/weights for integral exp(-t^2) f(t) dt (Newton on the
// orthonormal Hermite recurrence).
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(n, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[static_cast<std::size_t>(i - 2)];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-14) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    x[static_cast<std::size_t>(n - 1 - i)] = -z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / (pp * pp);
  }
}

// Posterior-mean MSE of unit-energy 4QAM under CN(0, tau2) noise.
double qpsk_mse_quadrature(double tau2) {
  std::vector<double> x, w;
  gauss_hermite(80, x, w);
  const double d = 1.0 / std::sqrt(2.0);
  const double s = std::sqrt(tau2 / 2.0);  // per-dimension noise std
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = d + std::sqrt(2.0) * s * x[i];
    const double e = d - d * std::tanh(2.0 * d * y / tau2);
    acc += w[i] * e * e;
  }
  return 2.0 * acc / std::sqrt(std::numbers::pi);
}

}  // namespace

TEST_CASE("DD-domain MSE oracle against quadrature and its limits") {
  const Constellation c(4);
  Rng rng(1);
  const McEstimate one = dd_mse_oracle(1.0, c, 200000, rng);
  CHECK(std::abs(one.value - qpsk_mse_quadrature(1.0)) < 0.01 * qpsk_mse_quadrature(1.0));
  CHECK(one.std_error > 0.0);
  CHECK(one.std_error < 0.01);
  CHECK(dd_mse_oracle(1e-4, c, 100000, rng).value < 1e-6);
  CHECK(dd_mse_oracle(1e4, c, 100000, rng).value == doctest::Approx(1.0).epsilon(0.02));
  double prev = 0.0;
  for (double t : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
    Rng r(2);
    const double v = dd_mse_oracle(t, Constellation(16), 100000, r).value;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("linear stage: bound ordering, noiseless limit and scalar closed form") {
  SeEnsemble ens{FrameGeometry{32, 8, 5, 15e3}, builtin_profile("EVA"), {}, 2};
  ens.channel.delay_scaling = DelayScaling::kFitLmax;
  ens.channel.max_doppler_taps = 1.5;
  for (double prior : {0.0, 0.1, 0.5, 1.0}) {
    Rng a(3), b(3);
    const double lo = se_linear_stage(prior, ens, 0.05, SeBound::kLower, a);
    const double up = se_linear_stage(prior, ens, 0.05, SeBound::kUpper, b);
    CHECK(lo <= up + 1e-12);
    CHECK(lo >= 0.0);
  }
  Rng z(4);
  CHECK(se_linear_stage(0.0, ens, 1e-9, SeBound::kLower, z) < 1e-6);

  SeEnsemble single{FrameGeometry{16, 4, 3, 15e3}, builtin_profile("single"), {}, 3};
  single.channel.speed_kmh = 0.0;
  Rng s1(5), s2(5);
  const double got = se_linear_stage(0.7, single, 0.1, SeBound::kUpper, s1);
  double expect = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto ch = generate_channel(single.profile, single.channel, single.geometry, s2);
    expect += 0.1 / std::norm(ch.paths[0].gain);
  }
  CHECK(got == doctest::Approx(expect / 3.0).epsilon(1e-9));
}

TEST_CASE("state evolution trajectory") {
  SeConfig cfg;
  cfg.ensemble = {FrameGeometry{32, 8, 5, 15e3}, builtin_profile("EVA"), {}, 20};
  cfg.ensemble.channel.delay_scaling = DelayScaling::kFitLmax;
  cfg.ensemble.channel.max_doppler_taps = 1.5;
  cfg.order = 16;
  cfg.snr_db = 17.0;
  cfg.iterations = 4;
  cfg.mc_samples = 50000;
  const auto rows = se_run(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.tau2_low <= r.tau2_up);
    CHECK(r.snr_eff_db == doctest::Approx(-10.0 * std::log10(r.tau2_low)));
  }
  CHECK(rows[1].tau2_low < rows[0].tau2_low);
  CHECK(rows[1].tau2_up < rows[0].tau2_up);
  const auto again = se_run(cfg);
  CHECK(again[3].tau2_low == rows[3].tau2_low);
  std::ostringstream os;
  write_se_csv(os, rows, {0.1});
  CHECK(os.str().rfind("iteration,tau2_low,tau2_up,tau2_sim,nu2,snr_eff_db\n", 0) == 0);
  cfg.iterations = 0;
  CHECK_THROWS_AS(se_run(cfg), ConfigError);
}
