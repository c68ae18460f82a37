#include "otfs/baselines.hpp"

#include <cmath>

namespace otfs {

MrcResult mrc_detect(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, int iterations) {
  if (iterations < 1) throw ConfigError("mrc iterations must be >= 1");
  const FrameGeometry& g = blocks.geometry();
  if (!(r.geometry == g)) throw Error("mrc_detect: signal geometry does not match channel");
  const int N = g.N, lm = g.l_max, rows = g.data_rows();

  MrcResult res;
  CVec est(g.size());
  CVec residual = r.samples;  // r - H est with est = 0
  CVec layer(static_cast<std::size_t>(N));

  // Per-sample branch energy, fixed across iterations.
  RVec energy(g.size(), 0.0);
  std::uint64_t branches_per_pass = 0;
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < rows; ++m) {
      double e = 0.0;
      for (int l = 0; l <= lm; ++l) {
        const double t = std::norm(blocks.tap(n, m + l, l));
        if (t > 0.0) ++branches_per_pass;
        e += t;
      }
      energy[g.index(m, n)] = e;
    }

  for (int it = 0; it < iterations; ++it) {
    for (int m = 0; m < rows; ++m) {
      for (int n = 0; n < N; ++n) {
        const std::size_t idx = g.index(m, n);
        if (energy[idx] == 0.0) {
          layer[static_cast<std::size_t>(n)] = est[idx];
          continue;
        }
        cd acc{};
        for (int l = 0; l <= lm; ++l) acc += std::conj(blocks.tap(n, m + l, l)) * residual[g.index(m + l, n)];
        layer[static_cast<std::size_t>(n)] = est[idx] + acc / energy[idx];
      }
      // Hard decision per Doppler bin, then back to time.
      dft_inplace(layer, false);
      for (auto& y : layer) y = c.point(c.nearest(y));
      dft_inplace(layer, true);
      for (int n = 0; n < N; ++n) {
        const std::size_t idx = g.index(m, n);
        const cd delta = layer[static_cast<std::size_t>(n)] - est[idx];
        est[idx] = layer[static_cast<std::size_t>(n)];
        if (delta == cd{}) continue;
        for (int l = 0; l <= lm; ++l) residual[g.index(m + l, n)] -= blocks.tap(n, m + l, l) * delta;
      }
    }
    ++res.counter.weight_computations;
    res.counter.complex_mults += branches_per_pass;
  }

  res.labels.resize(g.data_symbols());
  res.symbols.resize(g.data_symbols());
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < N; ++n) layer[static_cast<std::size_t>(n)] = est[g.index(m, n)];
    dft_inplace(layer, false);
    for (int k = 0; k < N; ++k) {
      const std::size_t d = static_cast<std::size_t>(m) + static_cast<std::size_t>(rows) * static_cast<std::size_t>(k);
      res.labels[d] = c.nearest(layer[static_cast<std::size_t>(k)]);
      res.symbols[d] = c.point(res.labels[d]);
    }
  }
  return res;
}

CVec full_lmmse_oracle(std::span<const cd> r, const CMatrix& H, std::span<const double> prior_var, double noise_var) {
  const std::size_t rows = H.rows(), cols = H.cols();
  if (rows > 256 || cols > 256) throw ConfigError("full_lmmse_oracle is limited to 256x256 blocks");
  if (r.size() != rows || prior_var.size() != cols) throw Error("full_lmmse_oracle: dimension mismatch");
  CMatrix A(rows, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      cd s{};
      for (std::size_t k = 0; k < cols; ++k) s += H(i, k) * prior_var[k] * std::conj(H(j, k));
      A(i, j) = s;
    }
    A(i, i) += noise_var;
  }
  const CVec z = hpd_solve(A, r);
  CVec out(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    cd s{};
    for (std::size_t i = 0; i < rows; ++i) s += std::conj(H(i, k)) * z[i];
    out[k] = prior_var[k] * s;
  }
  return out;
}

}  // namespace otfs
