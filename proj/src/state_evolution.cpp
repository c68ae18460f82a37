#include "otfs/state_evolution.hpp"

#include <cmath>
#include <ostream>

#include "otfs/detector.hpp"

namespace otfs {

double se_linear_stage(double tau2_prior, const SeEnsemble& ens, double noise_var, SeBound bound, Rng& rng, double es) {
  if (tau2_prior < 0.0) throw ConfigError("tau2_prior must be >= 0");
  if (ens.realizations < 1) throw ConfigError("se realizations must be >= 1");
  const FrameGeometry& g = ens.geometry;
  const double before = bound == SeBound::kLower ? 0.0 : es;
  double acc = 0.0;
  long count = 0;
  SubChannel sub;
  std::vector<double> v;
  for (int k = 0; k < ens.realizations; ++k) {
    const ChannelRealization chan = generate_channel(ens.profile, ens.channel, g, rng);
    const BlockChannelSet blocks = build_block_channels(chan, g, noise_var);
    for (int n = 0; n < g.N; ++n)
      for (int m = 0; m < g.data_rows(); ++m) {
        extract_subchannel(blocks, n, m, sub);
        v.assign(sub.H.cols(), 0.0);
        for (std::size_t c = 0; c < v.size(); ++c) {
          const int col = static_cast<int>(c);
          if (g.is_pad_row(sub.base + col))
            v[c] = 0.0;
          else if (col < sub.target)
            v[c] = before;
          else if (col == sub.target)
            v[c] = es;
          else
            v[c] = tau2_prior;
        }
        const MmseWeights w = mmse_weights(sub, v, noise_var);
        const double m2 = std::norm(w.mu);
        acc += std::max(0.0, (w.mu.real() - es * m2) / m2);
        ++count;
      }
  }
  return acc / static_cast<double>(count);
}

McEstimate dd_mse_oracle(double tau2, const Constellation& c, long samples, Rng& rng) {
  if (samples < 2) throw ConfigError("dd_mse_oracle needs at least 2 samples");
  if (!(tau2 > 0.0)) return {0.0, 0.0};
  double sum = 0.0, sum2 = 0.0;
  const int q = c.order();
  for (long s = 0; s < samples; ++s) {
    const int label = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(q));
    const cd x = c.point(label);
    const cd y = x + rng.complex_normal(tau2);
    const double e = std::norm(x - dd_posterior(y, tau2, c).mean);
    sum += e;
    sum2 += e * e;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

std::vector<SeRow> se_run(const SeConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("se iterations must be >= 1");
  const Constellation c(cfg.order);
  const double es = c.es();
  const double noise = es / std::pow(10.0, cfg.snr_db / 10.0);
  Rng root(cfg.seed, 0x5e);
  double prior_low = es, prior_up = es;
  std::vector<SeRow> rows;
  for (int it = 1; it <= cfg.iterations; ++it) {
    Rng chan_rng = root.fork(static_cast<std::uint64_t>(it));
    Rng mc_rng = root.fork(1000u + static_cast<std::uint64_t>(it));
    SeRow row;
    row.iteration = it;
    // Both bounds see the same channel draws.
    Rng low_rng = chan_rng, up_rng = chan_rng;
    row.tau2_low = se_linear_stage(prior_low, cfg.ensemble, noise, SeBound::kLower, low_rng, es);
    row.tau2_up = se_linear_stage(prior_up, cfg.ensemble, noise, SeBound::kUpper, up_rng, es);
    Rng mc_up = mc_rng.fork(2);
    const McEstimate lo = dd_mse_oracle(row.tau2_low, c, cfg.mc_samples, mc_rng);
    const McEstimate up = dd_mse_oracle(row.tau2_up, c, cfg.mc_samples, mc_up);
    row.nu2_low = lo.value;
    row.nu2_low_stderr = lo.std_error;
    row.nu2_up = up.value;
    row.snr_eff_db = 10.0 * std::log10(es / row.tau2_low);
    rows.push_back(row);
    prior_low = lo.value;
    prior_up = up.value;
  }
  return rows;
}

void write_se_csv(std::ostream& os, const std::vector<SeRow>& rows, const std::vector<double>& simulated) {
  os << "iteration,tau2_low,tau2_up,tau2_sim,nu2,snr_eff_db\n";
  os.precision(10);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SeRow& r = rows[i];
    os << r.iteration << ',' << r.tau2_low << ',' << r.tau2_up << ',';
    if (i < simulated.size()) os << simulated[i];
    os << ',' << r.nu2_low << ',' << r.snr_eff_db << '\n';
  }
}

}  // namespace otfs
