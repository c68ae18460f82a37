// Scalar state evolution for the iterative detector: predicts the
// per-iteration mean post-filter variance between a perfect-cancellation
// (lower) and a no-cancellation (upper) assumption for already detected layers.
#pragma once

#include <iosfwd>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/constellation.hpp"

namespace otfs {

enum class SeBound { kLower, kUpper };

/// Which sub-channels the linear stage averages over.
struct SeEnsemble {
  FrameGeometry geometry;
  DelayProfile profile;
  ChannelOptions channel;
  int realizations = 20;  // fresh channels per evaluation
};

/// Mean normalized post-MMSE variance over every data layer of `realizations`
/// random channels, with the remaining interference variances set by `bound`.
double se_linear_stage(double tau2_prior, const SeEnsemble& ens, double noise_var, SeBound bound, Rng& rng, double es = 1.0);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// E|x - E[x | x + n]|^2 for x uniform over the constellation and n ~ CN(0, tau2).
McEstimate dd_mse_oracle(double tau2, const Constellation& c, long samples, Rng& rng);

struct SeConfig {
  SeEnsemble ensemble;
  int order = 16;
  double snr_db = 17.0;
  int iterations = 5;
  long mc_samples = 200000;
  std::uint64_t seed = 1;
};

struct SeRow {
  int iteration = 0;
  double tau2_low = 0.0;
  double tau2_up = 0.0;
  double nu2_low = 0.0;
  double nu2_low_stderr = 0.0;
  double nu2_up = 0.0;
  double snr_eff_db = 0.0;  // Es / tau2_low
};

std::vector<SeRow> se_run(const SeConfig& cfg);

/// CSV with columns iteration,tau2_low,tau2_up,tau2_sim,nu2,snr_eff_db.
/// `simulated` may be empty (column left blank).
void write_se_csv(std::ostream& os, const std::vector<SeRow>& rows, const std::vector<double>& simulated = {});

}  // namespace otfs
