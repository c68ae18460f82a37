#include <doctest.h>

#include <numbers>

#include "otfs/detector.hpp"
#include "otfs/recycling.hpp"

using namespace otfs;

TEST_CASE("coherence symbols at full scale") {
  CHECK(std::abs(coherence_symbols(512, 128, 3.79) - 8645.0) < 1.0);
  CHECK_THROWS_AS(coherence_symbols(512, 128, 0.0), ConfigError);
}

TEST_CASE("closed-form rule reproduces the full-scale example") {
  const SpanInputs in{0.02, 3.79, 1.0, 0.0, 512, 128, 1.0};
  CHECK(recycling_span(in, SpanRule::kClosedForm) == 4295);
  CHECK(parse_span_rule("closed-form") == SpanRule::kClosedForm);
  CHECK_THROWS_AS(parse_span_rule("other"), ConfigError);
}

TEST_CASE("MSE-bound span grows with the tolerance and shrinks with Doppler") {
  for (double a : {0.5, 0.8, 0.95}) {
    int prev = 0;
    for (double db : {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1}) {
      const int s = recycling_span({db, 3.79, a, 0.0, 512, 128, 1.0});
      CHECK(s >= prev);
      prev = s;
    }
    double prevv = 1e300;
    for (double nu : {0.5, 1.0, 2.0, 3.79, 6.0}) {
      const double v = recycling_span_value({0.01, nu, a, 0.0, 512, 128, 1.0});
      CHECK(v < prevv);
      prevv = v;
    }
  }
  CHECK(std::isinf(recycling_span_value({0.01, 0.0, 0.9, 0.0, 64, 16, 1.0})));
  CHECK(recycling_span({0.01, 0.0, 0.9, 0.0, 64, 16, 1.0}, SpanRule::kMseBound, 57) == 57);
  CHECK(recycling_span({1e-9, 3.79, 0.9, 0.0, 64, 16, 1.0}) == 1);
  CHECK_THROWS_AS(admissible_rotation({0.0, 1.0, 0.9, 0.0, 64, 16, 1.0}), ConfigError);
  CHECK_THROWS_AS(admissible_rotation({5.0, 1.0, 0.9, 0.0, 64, 16, 1.0}), ConfigError);
}

TEST_CASE("MSE-bound rotation spends exactly the tolerance") {
  const double a = 0.8, db = 0.01;
  const double phi = admissible_rotation({db, 1.0, a, 0.0, 64, 16, 1.0});
  CHECK(2.0 * a * (1.0 - std::cos(phi)) == doctest::Approx(db).epsilon(1e-12));
}

TEST_CASE("recycled weights stay within the tolerance on a single-Doppler channel") {
  Rng rng(3);
  const FrameGeometry g{128, 8, 6, 15e3};
  for (double kappa : {0.7, 2.0, 3.79}) {
    ChannelRealization chan;
    chan.l_max = g.l_max;
    for (double d : {0.0, 1.0, 3.0, 6.0}) chan.paths.push_back({rng.complex_normal(0.25), d, kappa});
    const BlockChannelSet b = build_block_channels(chan, g, 0.05);
    const int m0 = 10;
    const SubChannel s0 = extract_subchannel(b, 2, m0);
    const std::vector<double> v(s0.H.cols(), 0.3);
    std::vector<double> vv = v;
    vv[static_cast<std::size_t>(s0.target)] = 1.0;
    const MmseWeights w = mmse_weights(s0, vv, 0.05);
    const double db = 0.01;
    const int span = recycling_span({db, kappa, std::abs(w.mu), std::arg(w.mu), g.M, g.N, 1.0}, SpanRule::kMseBound, 1000);
    for (int d = 1; d <= span && m0 + d < g.data_rows(); ++d) {
      const SubChannel sd = extract_subchannel(b, 2, m0 + d);
      const double recycled = filter_mse(w.w, sd, vv, 0.05);
      const double best = filter_mse(mmse_weights(sd, vv, 0.05).w, sd, vv, 0.05);
      CHECK(recycled - best <= db + 1e-6);
    }
  }
}

TEST_CASE("complexity formulas at full scale") {
  const ComplexityFormulas f = complexity_formulas(512, 128, 19, 9, 4, 100.0);
  CHECK(f.sic_mmse == doctest::Approx(4.33e8).epsilon(0.01));
  CHECK(f.approx_sic_mmse == doctest::Approx(4.33e6).epsilon(0.01));
  CHECK(f.mrc == doctest::Approx(5.68e5).epsilon(0.01));
  CHECK(f.message_passing == 4.0 * f.mrc);
  CHECK(f.classical_mmse == doctest::Approx(std::pow(493.0 * 128.0, 3)));
}
