#include "otfs/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace otfs {

std::string to_string(DetectorMode mode) {
  switch (mode) {
    case DetectorMode::kHard: return "hard";
    case DetectorMode::kSoft: return "soft";
    case DetectorMode::kApprox: return "approx";
  }
  return "?";
}

DetectorMode parse_detector_mode(const std::string& s) {
  if (s == "hard") return DetectorMode::kHard;
  if (s == "soft") return DetectorMode::kSoft;
  if (s == "approx") return DetectorMode::kApprox;
  throw ConfigError("detector mode must be 'hard', 'soft' or 'approx', got '" + s + "'");
}

void DetectorConfig::validate() const {
  if (iterations < 1) throw ConfigError("detector.iterations must be >= 1");
  if (mode == DetectorMode::kApprox && fixed_span <= 0 && !(delta_beta > 0.0)) throw ConfigError("detector.delta_beta must be > 0 in approx mode");
  if (fixed_span < 0) throw ConfigError("detector.fixed_span must be >= 0");
  if (!(es > 0.0)) throw ConfigError("detector.es must be > 0");
}

// ---------------------------------------------------------------------------

namespace {

double to_db(double x) { return 10.0 * std::log10(x); }

// Row range [lo, hi] of the nonzero band entries of window column c.
std::pair<int, int> column_rows(const SubChannel& sub, int c) {
  const int lm = static_cast<int>(sub.H.rows()) - 1;
  const int off = sub.base + c - sub.layer;  // row of tap 0
  return {std::max(0, off), std::min(lm, off + lm)};
}

// Scratch buffers reused across layers.
struct Workspace {
  SubChannel sub;
  CMatrix R;
  Cholesky chol;
  CVec u;
  std::vector<double> colvar;
  CVec r_hat;

  // Exact weights for `sub` and `colvar`; returns multiply count.
  std::uint64_t exact_weights(double noise_var, CVec& w, cd& mu) {
    const std::size_t n = sub.H.rows();
    if (R.rows() != n) R.resize(n, n);
    std::uint64_t mults = 0;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t r = 0; r < n; ++r) R(r, c) = r == c ? cd(noise_var, 0.0) : cd{};
    for (std::size_t c = 0; c < sub.H.cols(); ++c) {
      const double v = colvar[c];
      if (v == 0.0) continue;
      const auto [lo, hi] = column_rows(sub, static_cast<int>(c));
      const auto col = sub.H.col(c);
      for (int j = lo; j <= hi; ++j) {
        const cd cj = std::conj(col[static_cast<std::size_t>(j)]) * v;
        for (int i = j; i <= hi; ++i) R(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += col[static_cast<std::size_t>(i)] * cj;
      }
      mults += static_cast<std::uint64_t>((hi - lo + 1) * (hi - lo + 2) / 2);
    }
    try {
      chol.factor(R);
    } catch (const NotPositiveDefinite&) {
      // Rank-deficient window without noise: load the diagonal slightly.
      double tr = 0.0;
      for (std::size_t r = 0; r < n; ++r) tr += R(r, r).real();
      const double load = 1e-12 * std::max(tr, 1e-300);
      for (std::size_t r = 0; r < n; ++r) R(r, r) += load;
      chol.factor(R);
    }
    const auto h = sub.H.col(static_cast<std::size_t>(sub.target));
    u.assign(h.begin(), h.end());
    chol.solve_inplace(u);
    w.resize(n);
    mu = {};
    for (std::size_t r = 0; r < n; ++r) {
      w[r] = std::conj(u[r]);
      mu += w[r] * h[r];
    }
    mults += n * n * n / 6 + n * n + n;
    return mults;
  }
};

}  // namespace

MmseWeights mmse_weights(const SubChannel& sub, std::span<const double> v, double noise_var) {
  if (v.size() != sub.H.cols()) throw Error("mmse_weights: covariance length must match window columns");
  for (double x : v)
    if (x < 0.0) throw Error("mmse_weights: negative variance");
  if (noise_var < 0.0) throw Error("mmse_weights: negative noise variance");
  Workspace ws;
  ws.sub = sub;
  ws.colvar.assign(v.begin(), v.end());
  MmseWeights out;
  ws.exact_weights(noise_var, out.w, out.mu);
  return out;
}

CVec cancel_interference(std::span<const cd> r_bar, const SubChannel& sub, std::span<const cd> current, std::span<const cd> previous) {
  const std::size_t cols = sub.H.cols();
  if (r_bar.size() != sub.H.rows() || current.size() != cols || previous.size() != cols)
    throw Error("cancel_interference: dimension mismatch");
  CVec out(r_bar.begin(), r_bar.end());
  for (std::size_t c = 0; c < cols; ++c) {
    if (static_cast<int>(c) == sub.target) continue;
    const cd est = static_cast<int>(c) < sub.target ? current[c] : previous[c];
    const auto col = sub.H.col(c);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] -= col[r] * est;
  }
  return out;
}

FilterOutput filter_and_normalize(std::span<const cd> w, cd mu, std::span<const cd> r_hat, double es) {
  if (w.size() != r_hat.size()) throw Error("filter_and_normalize: dimension mismatch");
  if (std::abs(mu) < 1e-12) throw Error("filter_and_normalize: degenerate layer, |mu| < 1e-12");
  cd s{};
  for (std::size_t r = 0; r < w.size(); ++r) s += w[r] * r_hat[r];
  const double m2 = std::norm(mu);
  return {s / mu, std::max(0.0, (mu.real() - es * m2) / m2)};
}

double explicit_output_variance(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var) {
  if (w.size() != sub.H.rows() || err_var.size() != sub.H.cols()) throw Error("explicit_output_variance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t c = 0; c < sub.H.cols(); ++c) {
    if (static_cast<int>(c) == sub.target || err_var[c] == 0.0) continue;
    cd g{};
    const auto col = sub.H.col(c);
    for (std::size_t r = 0; r < w.size(); ++r) g += w[r] * col[r];
    acc += std::norm(g) * err_var[c];
  }
  return acc + norm2(w) * noise_var;
}

double layer_sinr(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var, double es) {
  cd mu{};
  const auto h = sub.H.col(static_cast<std::size_t>(sub.target));
  for (std::size_t r = 0; r < w.size(); ++r) mu += w[r] * h[r];
  const double den = explicit_output_variance(w, sub, err_var, noise_var);
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return std::norm(mu) * es / den;
}

double filter_mse(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var, double es) {
  cd mu{};
  const auto h = sub.H.col(static_cast<std::size_t>(sub.target));
  for (std::size_t r = 0; r < w.size(); ++r) mu += w[r] * h[r];
  return std::norm(mu - 1.0) * es + explicit_output_variance(w, sub, err_var, noise_var);
}

Posterior dd_posterior(cd y, double v, const Constellation& c, std::span<const double> prior) {
  const int q = c.order();
  if (!prior.empty() && prior.size() != static_cast<std::size_t>(q)) throw Error("dd_posterior: prior size mismatch");
  Posterior out;
  if (!(v > 1e-300) || !std::isfinite(v)) {
    if (std::isinf(v)) {
      // Uninformative observation: posterior equals the prior.
      cd mean{};
      double e2 = 0.0;
      int best = 0;
      for (int k = 0; k < q; ++k) {
        const double p = prior.empty() ? 1.0 / q : prior[static_cast<std::size_t>(k)];
        mean += p * c.point(k);
        e2 += p * std::norm(c.point(k));
        if (!prior.empty() && p > prior[static_cast<std::size_t>(best)]) best = k;
      }
      return {mean, std::max(0.0, e2 - std::norm(mean)), best};
    }
    const int k = c.nearest(y);
    return {c.point(k), 0.0, k};
  }
  double logw[16];
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < q; ++k) {
    double lw = -std::norm(y - c.point(k)) / v;
    if (!prior.empty()) lw += prior[static_cast<std::size_t>(k)] > 0.0 ? std::log(prior[static_cast<std::size_t>(k)]) : -std::numeric_limits<double>::infinity();
    logw[k] = lw;
    if (lw > mx) {
      mx = lw;
      out.hard = k;
    }
  }
  if (!std::isfinite(mx)) {
    const int k = c.nearest(y);
    return {c.point(k), 0.0, k};
  }
  double total = 0.0;
  double wts[16];
  for (int k = 0; k < q; ++k) total += wts[k] = std::exp(logw[k] - mx);
  cd mean{};
  for (int k = 0; k < q; ++k) mean += (wts[k] / total) * c.point(k);
  double var = 0.0;
  for (int k = 0; k < q; ++k) var += (wts[k] / total) * std::norm(c.point(k) - mean);
  out.mean = mean;
  out.var = var;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

int span_after_refresh(const DetectorConfig& cfg, const BlockChannelSet& blocks, cd mu, int cap) {
  if (cfg.fixed_span > 0) return cfg.fixed_span;
  const auto& g = blocks.geometry();
  SpanInputs in{cfg.delta_beta, blocks.nu_max(), std::abs(mu), std::arg(mu), g.M, g.N, cfg.es};
  try {
    return recycling_span(in, cfg.span_rule, cap);
  } catch (const ConfigError&) {
    // Outside the arccos domain: the tolerance exceeds any achievable excess
    // MSE (mse-bound) or no rotation is admissible (closed-form).
    return cfg.span_rule == SpanRule::kMseBound ? cap : 1;
  }
}

}  // namespace

DetectionResult detect_frame(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, const DetectorConfig& cfg,
                             const SymbolPriors* priors) {
  cfg.validate();
  const FrameGeometry& g = blocks.geometry();
  if (!(r.geometry == g)) throw Error("detect_frame: signal geometry does not match channel");
  const int M = g.M, N = g.N, lm = g.l_max, rows = g.data_rows();
  const int q = c.order();
  const double es = cfg.es;
  const double noise = blocks.noise_var();
  const bool hard = cfg.mode == DetectorMode::kHard;
  const bool approx = cfg.mode == DetectorMode::kApprox;
  if (priors && (priors->order != q || priors->probs.size() != g.data_symbols() * static_cast<std::size_t>(q)))
    throw Error("detect_frame: priors do not match frame");

  DetectionResult res;
  SoftState& st = res.state;
  st.time_est.assign(g.size(), cd{});
  st.time_var.assign(g.size(), 0.0);
  st.dd_obs.assign(g.size(), cd{});
  st.dd_obs_var.assign(g.size(), 0.0);
  st.dd_est.assign(g.size(), cd{});
  st.dd_var.assign(g.size(), 0.0);
  st.mu.assign(g.size(), cd{});
  st.post_var.assign(g.size(), 0.0);

  auto data_index = [rows](int m, int k) { return static_cast<std::size_t>(m) + static_cast<std::size_t>(rows) * static_cast<std::size_t>(k); };
  auto prior_of = [&](int m, int k) -> std::span<const double> {
    if (!priors) return {};
    return priors->symbol(data_index(m, k));
  };

  CVec layer(static_cast<std::size_t>(N));
  RVec layer_var(static_cast<std::size_t>(N));

  // Initial priors: zero mean / Es variance, or the decoder's soft symbols.
  for (int m = 0; m < rows; ++m) {
    if (!priors) {
      for (int n = 0; n < N; ++n) st.time_var[g.index(m, n)] = es;
      continue;
    }
    for (int k = 0; k < N; ++k) {
      const auto p = prior_of(m, k);
      cd mean{};
      double e2 = 0.0;
      for (int a = 0; a < q; ++a) {
        mean += p[static_cast<std::size_t>(a)] * c.point(a);
        e2 += p[static_cast<std::size_t>(a)] * std::norm(c.point(a));
      }
      layer[static_cast<std::size_t>(k)] = mean;
      layer_var[static_cast<std::size_t>(k)] = std::max(0.0, e2 - std::norm(mean));
    }
    const LayerTime t = dd_to_layer(layer, layer_var);
    for (int n = 0; n < N; ++n) {
      st.time_est[g.index(m, n)] = t.est[static_cast<std::size_t>(n)];
      st.time_var[g.index(m, n)] = t.var[static_cast<std::size_t>(n)];
    }
  }

  // Running interference-reduced residual r - H s_est per block.
  CVec residual = r.samples;
  {
    CVec hs(static_cast<std::size_t>(M));
    for (int n = 0; n < N; ++n) {
      blocks.apply_block(n, std::span<const cd>(st.time_est).subspan(static_cast<std::size_t>(n) * M, static_cast<std::size_t>(M)), hs);
      for (int m = 0; m < M; ++m) residual[g.index(m, n)] -= hs[static_cast<std::size_t>(m)];
    }
  }

  Workspace ws;
  std::vector<CVec> cached_w(static_cast<std::size_t>(N));
  std::vector<int> next_refresh(static_cast<std::size_t>(N), 0);
  CVec w_exact;
  CVec lin_est(cfg.record_iterations ? g.size() : 0);

  for (int it = 1; it <= cfg.iterations; ++it) {
    std::fill(next_refresh.begin(), next_refresh.end(), 0);
    if (cfg.record_iterations) std::fill(lin_est.begin(), lin_est.end(), cd{});
    double var_sum = 0.0;

    for (int m = 0; m < rows; ++m) {
      for (int n = 0; n < N; ++n) {
        extract_subchannel(blocks, n, m, ws.sub);
        const int cols = static_cast<int>(ws.sub.H.cols());
        const int target = ws.sub.target;
        ws.colvar.resize(static_cast<std::size_t>(cols));
        for (int col = 0; col < cols; ++col) {
          const int sample = ws.sub.base + col;
          double v;
          if (col == target)
            v = es;
          else if (g.is_pad_row(sample))
            v = 0.0;
          else if (hard)
            v = (it == 1 && col > target) ? st.time_var[g.index(sample, n)] : 0.0;
          else
            v = st.time_var[g.index(sample, n)];
          ws.colvar[static_cast<std::size_t>(col)] = v;
        }

        CVec& w = cached_w[static_cast<std::size_t>(n)];
        const bool refresh = !approx || m >= next_refresh[static_cast<std::size_t>(n)];
        cd mu{};
        if (refresh) {
          res.counter.complex_mults += ws.exact_weights(noise, w, mu);
          ++res.counter.weight_computations;
          if (approx) next_refresh[static_cast<std::size_t>(n)] = m + span_after_refresh(cfg, blocks, mu, rows) + 1;
        } else {
          ++res.counter.recycled_layers;
        }

        // r_hat = residual window with the target's own estimate added back.
        const auto h = ws.sub.H.col(static_cast<std::size_t>(target));
        const cd own = st.time_est[g.index(m, n)];
        ws.r_hat.resize(static_cast<std::size_t>(lm + 1));
        for (int rr = 0; rr <= lm; ++rr)
          ws.r_hat[static_cast<std::size_t>(rr)] = residual[g.index(m + rr, n)] + h[static_cast<std::size_t>(rr)] * own;

        if (!refresh) {
          mu = {};
          for (int rr = 0; rr <= lm; ++rr) mu += w[static_cast<std::size_t>(rr)] * h[static_cast<std::size_t>(rr)];
        }
        FilterOutput out = filter_and_normalize(w, mu, ws.r_hat, es);
        if (!refresh) out.variance = explicit_output_variance(w, ws.sub, ws.colvar, noise) / std::norm(mu);
        res.counter.complex_mults += static_cast<std::uint64_t>(3 * (lm + 1));

        const std::size_t idx = g.index(m, n);
        st.mu[idx] = mu;
        st.post_var[idx] = out.variance;
        var_sum += out.variance;
        layer[static_cast<std::size_t>(n)] = out.estimate;
        layer_var[static_cast<std::size_t>(n)] = out.variance;
        if (cfg.record_iterations) lin_est[idx] = out.estimate;

        if (cfg.trace) {
          TraceRow row;
          row.iteration = it;
          row.layer = m;
          row.block = n;
          row.mu = mu;
          row.sigma2_post = out.variance;
          row.recomputed = refresh;
          const double sinr = layer_sinr(w, ws.sub, ws.colvar, noise, es);
          row.sinr_db = to_db(sinr);
          if (refresh) {
            row.sinr_exact_db = row.sinr_db;
          } else {
            cd mu_exact;
            ws.exact_weights(noise, w_exact, mu_exact);
            row.sinr_exact_db = to_db(layer_sinr(w_exact, ws.sub, ws.colvar, noise, es));
          }
          res.trace.push_back(row);
        }
      }

      // Doppler-domain stage for layer m.
      const LayerDD dd = layer_to_dd(layer, layer_var);
      for (int k = 0; k < N; ++k) {
        const std::size_t idx = g.index(m, k);
        const cd y = dd.obs[static_cast<std::size_t>(k)];
        const double v = dd.var[static_cast<std::size_t>(k)];
        st.dd_obs[idx] = y;
        st.dd_obs_var[idx] = v;
        if (hard) {
          const int label = c.nearest(y);
          st.dd_est[idx] = c.point(label);
          st.dd_var[idx] = 0.0;
        } else {
          const Posterior p = dd_posterior(y, v, c, prior_of(m, k));
          st.dd_est[idx] = p.mean;
          st.dd_var[idx] = p.var;
        }
        layer[static_cast<std::size_t>(k)] = st.dd_est[idx];
        layer_var[static_cast<std::size_t>(k)] = st.dd_var[idx];
      }
      res.counter.complex_mults += static_cast<std::uint64_t>(2 * N * std::max(1, static_cast<int>(std::log2(N))));
      const LayerTime back = dd_to_layer(layer, layer_var);

      // New priors for layer m, and the residual update they imply.
      for (int n = 0; n < N; ++n) {
        const std::size_t idx = g.index(m, n);
        const cd delta = back.est[static_cast<std::size_t>(n)] - st.time_est[idx];
        st.time_est[idx] = back.est[static_cast<std::size_t>(n)];
        st.time_var[idx] = back.var[static_cast<std::size_t>(n)];
        if (delta == cd{}) continue;
        for (int rr = 0; rr <= lm; ++rr) residual[g.index(m + rr, n)] -= blocks.tap(n, m + rr, rr) * delta;
      }
      res.counter.complex_mults += static_cast<std::uint64_t>(N * (lm + 1));
    }

    res.predicted_mse.push_back(var_sum / static_cast<double>(g.data_symbols()));
    if (cfg.record_iterations) res.linear_estimates.push_back(lin_est);
  }

  // Final decisions in fill order.
  res.labels.resize(g.data_symbols());
  res.symbols.resize(g.data_symbols());
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < rows; ++m) {
      const std::size_t idx = g.index(m, k);
      int label;
      if (hard || !priors)
        label = c.nearest(st.dd_obs[idx]);
      else
        label = dd_posterior(st.dd_obs[idx], st.dd_obs_var[idx], c, prior_of(m, k)).hard;
      res.labels[data_index(m, k)] = label;
      res.symbols[data_index(m, k)] = c.point(label);
    }
  return res;
}

}  // namespace otfs
