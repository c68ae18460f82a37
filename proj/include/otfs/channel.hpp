// Doubly-selective multipath channel: path generation from a power-delay
// profile, the sampled delay-time response, the banded per-block channel
// matrices of zero-padded OTFS, sub-channel windows, and the receiver-side
// CSI error model.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "otfs/frame.hpp"
#include "otfs/numeric.hpp"

namespace otfs {

/// Tapped-delay-line power profile (delays in ns, relative powers in dB).
struct DelayProfile {
  std::string name;
  std::vector<double> delays_ns;
  std::vector<double> powers_db;

  double max_delay_ns() const;
};

/// 3GPP TS 36.104 extended profiles. "single" is one unit path at delay 0.
DelayProfile builtin_profile(const std::string& name);
/// JSON file: {"name": "...", "delays_ns": [...], "powers_db": [...]}.
DelayProfile load_profile(const std::string& path);

enum class DelayGrid { kInteger, kFractional };
enum class DelayScaling {
  kPhysical,  // tap = delay * M * delta_f
  kFitLmax,   // largest profile delay maps onto l_max taps
};

struct ChannelOptions {
  double speed_kmh = 120.0;
  double carrier_hz = 4e9;
  DelayGrid delay_grid = DelayGrid::kInteger;
  DelayScaling delay_scaling = DelayScaling::kPhysical;
  /// When > 0, overrides the Doppler tap bound derived from speed/carrier.
  double max_doppler_taps = 0.0;
};

struct ChannelPath {
  cd gain;             // h_i
  double delay = 0.0;  // l_i, units of T/M
  double doppler = 0.0;  // kappa_i, units of delta_f / N
};

struct ChannelRealization {
  std::vector<ChannelPath> paths;
  int l_max = 0;
  double k_max = 0.0;  // Doppler tap bound of the model

  /// Largest |kappa| actually present.
  double max_abs_doppler() const;
};

/// Maximum Doppler in taps: f_d * N / delta_f with f_d = v f_c / c.
double doppler_taps_bound(const FrameGeometry& g, double speed_kmh, double carrier_hz);
/// Profile delays in taps under the given scaling (not rounded).
std::vector<double> profile_delay_taps(const DelayProfile& p, const FrameGeometry& g, DelayScaling scaling);
/// Smallest zero pad that holds the rounded physical profile.
int required_lmax(const DelayProfile& p, const FrameGeometry& g);

/// Draws one realization: CN gains with unit total mean power, Doppler taps
/// uniform in [-k_max, k_max]. Throws ConfigError if a delay exceeds l_max.
ChannelRealization generate_channel(const DelayProfile& profile, const ChannelOptions& opts, const FrameGeometry& g, Rng& rng);

/// Sampled delay-time response h_e(l, t) at tap l and absolute sample t,
/// summing h_i exp(j 2 pi kappa_i (t - l_i) / (N M)) sinc(l - l_i) over paths.
cd delay_time_response(const ChannelRealization& chan, const FrameGeometry& g, int l, long t);

/// Banded block channel H = diag(H_0, ..., H_{N-1}); H_n(m, m - l) is
/// tap(n, m, l) for 0 <= l <= l_max and m >= l, zero elsewhere.
class BlockChannelSet {
 public:
  BlockChannelSet() = default;
  BlockChannelSet(const FrameGeometry& g, double noise_var);

  const FrameGeometry& geometry() const { return geom_; }
  int l_max() const { return geom_.l_max; }
  double noise_var() const { return noise_var_; }
  void set_noise_var(double v) { noise_var_ = v; }
  /// Largest |Doppler tap| of the realization the set was built from.
  double nu_max() const { return nu_max_; }
  void set_nu_max(double v) { nu_max_ = v; }

  cd& tap(int n, int m, int l) { return taps_[offset(n, m, l)]; }
  cd tap(int n, int m, int l) const { return taps_[offset(n, m, l)]; }

  /// H_n(row, col), zero outside the band.
  cd entry(int n, int row, int col) const;
  /// Dense M x M matrix of block n.
  CMatrix block_matrix(int n) const;
  /// y = H_n x for one block.
  void apply_block(int n, std::span<const cd> x, std::span<cd> y) const;

  bool operator==(const BlockChannelSet& other) const;

 private:
  std::size_t offset(int n, int m, int l) const {
    return (static_cast<std::size_t>(n) * static_cast<std::size_t>(geom_.M) + static_cast<std::size_t>(m)) *
               static_cast<std::size_t>(geom_.l_max + 1) +
           static_cast<std::size_t>(l);
  }

  FrameGeometry geom_;
  double noise_var_ = 0.0;
  double nu_max_ = 0.0;
  std::vector<cd> taps_;
};

/// Populates every band tap; agrees with delay_time_response at t = nM + m.
/// Fractional delays are sinc-interpolated and truncated at l_max.
BlockChannelSet build_block_channels(const ChannelRealization& chan, const FrameGeometry& g, double noise_var);

/// Window of H_n seen by layer m: rows m..m+l_max, columns base..m+l_max
/// with base = max(m - l_max, 0); the target sample sits in column
/// target = min(m, l_max).
struct SubChannel {
  CMatrix H;
  int target = 0;  // l'
  int base = 0;    // m'
  int layer = 0;   // m
};

/// Throws if m lies in the zero pad (m > M - l_max - 1).
SubChannel extract_subchannel(const BlockChannelSet& blocks, int n, int m);
/// Allocation-free variant for the detector loop.
void extract_subchannel(const BlockChannelSet& blocks, int n, int m, SubChannel& out);

/// r_n = H_n s_n + z_n with z_n ~ CN(0, noise_var I).
TimeSignal apply_channel(const TimeSignal& signal, const BlockChannelSet& blocks, Rng& rng);

/// Receiver-side channel knowledge error. Each delay tap's first-column
/// coefficient gets CN(0, sigma_h2) added and each path's Doppler a real
/// N(0, sigma_k2) error; the believed channel is then rebuilt from those
/// estimates.
struct CsiErrorModel {
  double sigma_h2 = 0.0;
  double sigma_k2 = 0.0;
};

/// Realization the receiver believes in (gains/Dopplers perturbed).
ChannelRealization perturb_realization(const ChannelRealization& chan, const CsiErrorModel& model, Rng& rng);
BlockChannelSet perturb_csi(const ChannelRealization& chan, const FrameGeometry& g, double noise_var, const CsiErrorModel& model, Rng& rng);

// Text dump: '#' comment header, then one path per line
// "gain_re,gain_im,delay_taps,doppler_taps" with round-trip precision.
void write_channel_csv(std::ostream& os, const ChannelRealization& chan);
ChannelRealization read_channel_csv(std::istream& is);

}  // namespace otfs
