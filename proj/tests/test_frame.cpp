#include <doctest.h>

#include <chrono>
#include <sstream>

#include "oracles.hpp"
#include "otfs/constellation.hpp"
#include "otfs/frame.hpp"

using namespace otfs;

namespace {
DDFrame random_frame(const FrameGeometry& g, Rng& rng) {
  DDFrame f(g);
  CVec d(g.data_symbols());
  for (auto& x : d) x = rng.complex_normal(1.0);
  f.fill_data(d);
  return f;
}
}  // namespace

TEST_CASE("geometry validation") {
  CHECK_NOTHROW(FrameGeometry{}.validate());
  CHECK_THROWS_AS((FrameGeometry{8, 4, 8, 15e3}.validate()), ConfigError);
  CHECK_THROWS_AS((FrameGeometry{8, 0, 2, 15e3}.validate()), ConfigError);
  CHECK_THROWS_AS((FrameGeometry{8, 4, 0, 15e3}.validate()), ConfigError);
  CHECK_THROWS_AS((FrameGeometry{8, 4, 2, 0.0}.validate()), ConfigError);
  const FrameGeometry g{64, 16, 7, 15e3};
  CHECK(g.sample_interval() == doctest::Approx(1.0 / (15e3 * 64)));
  CHECK(g.data_symbols() == 57u * 16u);
}

TEST_CASE("Zak and two-step transmit paths agree") {
  Rng rng(1);
  const auto t0 = std::chrono::steady_clock::now();
  for (int M : {8, 16, 32})
    for (int N : {8, 16, 32}) {
      const FrameGeometry g{M, N, 3, 15e3};
      const DDFrame f = random_frame(g, rng);
      const TimeSignal a = idzt_transmit(f), b = isfft_heisenberg_transmit(f);
      CHECK(oracle::max_abs_diff(a.samples, b.samples) < 1e-10);
    }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 1.0);
}

TEST_CASE("transmit matches the per-row inverse DFT formula and the receive transform inverts it") {
  Rng rng(2);
  const FrameGeometry g{16, 12, 4, 15e3};
  const DDFrame f = random_frame(g, rng);
  const TimeSignal s = idzt_transmit(f);
  for (int m = 0; m < g.M; ++m)
    for (int n = 0; n < g.N; ++n) {
      cd ref{};
      for (int k = 0; k < g.N; ++k) ref += f.at(m, k) * std::polar(1.0, 2.0 * std::numbers::pi * n * k / g.N);
      CHECK(std::abs(s.at(m, n) - ref / std::sqrt(12.0)) < 1e-12);
    }
  const DDFrame back = dzt_receive(s);
  CHECK(oracle::max_abs_diff(CVec(back.grid().begin(), back.grid().end()), CVec(f.grid().begin(), f.grid().end())) < 1e-12);
  CHECK(back.pad_is_zero());
}

TEST_CASE("frame data order and pad protection") {
  const FrameGeometry g{8, 3, 2, 15e3};
  DDFrame f(g);
  CHECK_THROWS(f.set(6, 0, 1.0));
  CHECK_THROWS(f.set(0, 3, 1.0));
  CVec d(g.data_symbols());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<double>(k);
  f.fill_data(d);
  CHECK(f.at(0, 0) == 0.0);
  CHECK(f.at(5, 0) == 5.0);
  CHECK(f.at(0, 1) == 6.0);
  CHECK(f.data() == d);
  CHECK(f.pad_is_zero());
  CHECK_THROWS(f.fill_data(CVec(3)));
}

TEST_CASE("layer transforms carry variance as documented") {
  const CVec est{1.0, cd(0, 1), -1.0, 0.5};
  const RVec var{0.1, 0.2, 0.3, 0.4};
  const LayerDD dd = layer_to_dd(est, var);
  CHECK(oracle::max_abs_diff(dd.obs, oracle::direct_dft(est, false)) < 1e-14);
  CHECK(dd.var == var);
  const LayerTime t = dd_to_layer(dd.obs, var);
  CHECK(oracle::max_abs_diff(t.est, est) < 1e-14);
  for (double v : t.var) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("binary frame dump round trip and corruption checks") {
  Rng rng(3);
  const FrameGeometry g{16, 4, 3, 15e3};
  const DDFrame f = random_frame(g, rng);
  std::stringstream ss;
  write_frame(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 16 + 12 + 16 * g.size());
  CHECK(bytes.substr(0, 16) == std::string(kFrameMagic, 16));
  std::stringstream in(bytes);
  const DDFrame r = read_frame(in);
  CHECK(r.geometry() == g);
  for (int m = 0; m < g.M; ++m)
    for (int n = 0; n < g.N; ++n) CHECK(r.at(m, n) == f.at(m, n));
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream b1(bad);
  CHECK_THROWS(read_frame(b1));
  std::stringstream b2(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS(read_frame(b2));
}
