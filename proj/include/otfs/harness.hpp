// Experiment harness: run configuration, seeded Monte Carlo loops and CSV
// output for BER, MSE, SINR, state-evolution, turbo and complexity runs.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otfs/baselines.hpp"
#include "otfs/channel.hpp"
#include "otfs/detector.hpp"
#include "otfs/state_evolution.hpp"
#include "otfs/turbo.hpp"

namespace otfs {

struct ChannelConfig {
  std::string profile = "EVA";  // builtin name or path to a JSON profile
  double speed_kmh = 120.0;
  double carrier_hz = 4e9;
  bool fractional_delays = false;
  DelayScaling delay_scaling = DelayScaling::kFitLmax;
  double max_doppler_taps = 3.79;  // 0: derive from speed and carrier

  ChannelOptions options() const;
  DelayProfile load() const;
};

struct BerConfig {
  std::vector<std::string> detectors{"soft", "mrc"};  // soft | hard | approx | mrc
  std::vector<double> snr_db{8.0, 12.0, 16.0};
  long min_errors = 100;
  long min_bits = 100000;
  long max_frames = 2000;
};

struct TurboRunConfig {
  std::string code = "bundled";  // "bundled" or path to an alist file
  int iterations = 2;
  int bp_iterations = 50;
  bool intrinsic_feedback = true;
  bool min_sum = false;
  bool max_log = false;
  std::uint64_t interleaver_seed = 7;
  long frames = 50;
};

struct SeRunConfig {
  double snr_db = 17.0;
  int realizations = 20;
  long mc_samples = 200000;
  long frames = 40;  // simulated frames for the MSE trace
};

struct RunConfig {
  std::string preset = "desk";
  FrameGeometry geometry{64, 16, 7, 15e3};
  ChannelConfig channel;
  int order = 4;
  DetectorConfig detector;
  BerConfig ber;
  TurboRunConfig turbo;
  CsiErrorModel csi;
  SeRunConfig se;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  static RunConfig preset_named(const std::string& name);
  /// Parses JSON; an optional "preset" key selects the base values that the
  /// remaining keys override. Unknown keys are rejected.
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json() const;
};

double noise_var_for_snr(double snr_db, double es = 1.0);

/// One simulated frame: what was sent and what the receiver sees.
struct FrameSample {
  ChannelRealization channel;
  BlockChannelSet truth;     // true channel
  BlockChannelSet receiver;  // channel as known at the receiver (CSI errors applied)
  std::vector<std::uint8_t> bits;
  DDFrame frame{FrameGeometry{}};
  TimeSignal tx;
  TimeSignal rx;
};

/// Deterministic in (seed, frame index); noise scaled to `noise_var`.
FrameSample simulate_frame(const RunConfig& cfg, const Constellation& c, const DelayProfile& profile, double noise_var,
                           std::uint64_t frame_index);

struct ResultRow {
  double snr_db = 0.0;
  std::string detector;
  double ber = 0.0;
  long bit_count = 0;
  long error_count = 0;
  long frame_count = 0;
  double wall_time_s = 0.0;
  std::uint64_t multiply_count = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Wilson 95% interval for `errors` out of `bits`.
std::pair<double, double> binomial_ci95(long errors, long bits);

/// Hard labels and complexity for one detector name on one frame.
struct NamedDetection {
  std::vector<int> labels;
  ComplexityCounter counter;
};
NamedDetection run_named_detector(const std::string& name, const FrameSample& s, const Constellation& c, const DetectorConfig& cfg);

/// Paired BER run: every detector sees the same frames. A point stops once
/// each detector has min_errors errors and min_bits bits, or at max_frames.
std::vector<ResultRow> run_ber(const RunConfig& cfg);
void write_ber_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool timing = false);

struct MseTraceRow {
  int iteration = 0;
  double mse_sim = 0.0;
  double mse_stderr = 0.0;
  double tau2_low = 0.0;
  double tau2_up = 0.0;
  double nu2 = 0.0;
  double snr_eff_db = 0.0;
};

/// Iteration 0 is the prior (Es); iterations 1..i_max compare the simulated
/// linear-stage MSE against the state-evolution bounds.
std::vector<MseTraceRow> run_mse_trace(const RunConfig& cfg);
void write_mse_csv(std::ostream& os, const std::vector<MseTraceRow>& rows);

/// Detector trace of one frame at the first BER SNR point.
std::vector<TraceRow> run_sinr_trace(const RunConfig& cfg);
void write_sinr_csv(std::ostream& os, const std::vector<TraceRow>& rows);

struct TurboRow {
  double snr_db = 0.0;
  int iteration = 0;
  double coded_ber = 0.0;
  double uncoded_ber = 0.0;
  long info_bits = 0;
  long info_errors = 0;
  long coded_bits = 0;
  long coded_errors = 0;
  long frames = 0;
};

std::vector<TurboRow> run_turbo(const RunConfig& cfg);
void write_turbo_csv(std::ostream& os, const std::vector<TurboRow>& rows);

LdpcCode load_code(const TurboRunConfig& cfg);

struct ComplexityRow {
  std::string quantity;
  double value = 0.0;
};

/// Formula counts for the configured geometry and span, plus counters
/// measured on one frame (per detector iteration).
std::vector<ComplexityRow> complexity_report(const RunConfig& cfg, int paths, double span);
void write_complexity_csv(std::ostream& os, const std::vector<ComplexityRow>& rows);

/// 64-bit FNV-1a of a byte string, printed as 16 hex digits.
std::string content_hash(const std::string& bytes);

/// JSON manifest: config, seed and the hash of the first frame's channel dump.
std::string run_manifest(const RunConfig& cfg, const std::string& command);

}  // namespace otfs
