// Cross-domain SIC-MMSE detection for zero-padded OTFS.
//
// Each time-domain sample s_{n,m} is a "layer" seen through a small window
// of H_n (see SubChannel). Per iteration the detector walks the data layers
// m = 0 .. M-l_max-1; for each layer it runs interference cancellation and
// an MMSE filter in every block n, moves the N filtered samples to the
// Doppler domain, makes a per-symbol decision there (hard or posterior-mean),
// and moves the result back to update the priors for later layers.
//
// The approximate mode reuses ("recycles") one layer's exact weights for the
// following span of layers and only recomputes them when the span computed
// from the MSE tolerance runs out.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/constellation.hpp"
#include "otfs/frame.hpp"
#include "otfs/recycling.hpp"

namespace otfs {

enum class DetectorMode {
  kHard,    // hard interference cancellation, ML decisions
  kSoft,    // soft cancellation with DD posterior mean/variance
  kApprox,  // soft cancellation with recycled filter weights
};

std::string to_string(DetectorMode mode);
DetectorMode parse_detector_mode(const std::string& s);

struct DetectorConfig {
  DetectorMode mode = DetectorMode::kSoft;
  int iterations = 10;
  /// MSE tolerance for weight recycling (approx mode).
  double delta_beta = 0.01;
  /// > 0: recycle for exactly this many layers after each refresh instead of
  /// deriving the span from the latest exact mu.
  int fixed_span = 0;
  SpanRule span_rule = SpanRule::kMseBound;
  /// Symbol energy carried through the formulas.
  double es = 1.0;
  /// Collect a per-(iteration, layer, block) trace.
  bool trace = false;
  /// Keep every iteration's normalized linear-stage estimates.
  bool record_iterations = false;

  void validate() const;
};

struct ComplexityCounter {
  std::uint64_t weight_computations = 0;  // exact MMSE weight evaluations
  std::uint64_t recycled_layers = 0;      // layers filtered with reused weights
  std::uint64_t complex_mults = 0;        // approximate multiply count

  ComplexityCounter& operator+=(const ComplexityCounter& o) {
    weight_computations += o.weight_computations;
    recycled_layers += o.recycled_layers;
    complex_mults += o.complex_mults;
    return *this;
  }
};

struct TraceRow {
  int iteration = 0;
  int layer = 0;  // m
  int block = 0;  // n
  cd mu;
  double sigma2_post = 0.0;
  double sinr_db = 0.0;        // with the weights actually used
  double sinr_exact_db = 0.0;  // with exact weights for the same covariance
  bool recomputed = true;
};

/// Optional decoder feedback: per data symbol, a probability over the
/// constellation labels (row-major, `order` entries per symbol, symbols in
/// DDFrame::fill_data order).
struct SymbolPriors {
  int order = 0;
  RVec probs;

  std::span<const double> symbol(std::size_t k) const {
    return {probs.data() + k * static_cast<std::size_t>(order), static_cast<std::size_t>(order)};
  }
};

/// Per-frame detector state, indexed m + M*n like the frame itself.
struct SoftState {
  CVec time_est;    // current time-domain estimate of s_{n,m}
  RVec time_var;    // its error variance
  CVec dd_obs;      // y_m[k], DD observation after the linear stage
  RVec dd_obs_var;  // its variance
  CVec dd_est;      // posterior mean x~_m[k]
  RVec dd_var;      // posterior variance
  CVec mu;          // mu_{n,m} of the last iteration
  RVec post_var;    // normalized post-filter variance of the last iteration
};

struct DetectionResult {
  SoftState state;
  std::vector<int> labels;   // hard labels, DDFrame::fill_data order
  CVec symbols;              // constellation points for `labels`
  ComplexityCounter counter;
  std::vector<TraceRow> trace;
  /// Per iteration: normalized linear-stage outputs (time domain, pad = 0).
  std::vector<CVec> linear_estimates;
  /// Per iteration: mean predicted post-filter variance over data layers.
  std::vector<double> predicted_mse;
};

// ---------------------------------------------------------------------------
// Building blocks

struct MmseWeights {
  CVec w;  // row vector, s_hat = sum_r w[r] * r_hat[r]
  cd mu;   // w * H[:, target]
};

/// w = h^H (H V H^H + noise_var I)^{-1} with h the target column, solved by
/// Cholesky. `v` is the diagonal of V, one entry per window column.
MmseWeights mmse_weights(const SubChannel& sub, std::span<const double> v, double noise_var);

/// r_hat = r_bar - sum_{j<l'} H[:,j] current[j] - sum_{k>l'} H[:,k] previous[k].
/// Both estimate vectors are column-aligned with the window.
CVec cancel_interference(std::span<const cd> r_bar, const SubChannel& sub, std::span<const cd> current, std::span<const cd> previous);

struct FilterOutput {
  cd estimate;         // (w r_hat) / mu
  double variance = 0.0;  // (mu - Es|mu|^2) / |mu|^2, equal to the textbook form at Es = 1
};

/// Applies w and removes the bias mu. Throws when |mu| < 1e-12.
FilterOutput filter_and_normalize(std::span<const cd> w, cd mu, std::span<const cd> r_hat, double es = 1.0);

/// Raw (unnormalized) filter-output variance for arbitrary weights:
/// sum_{j != l'} |w H[:,j]|^2 err_var[j] + ||w||^2 noise_var.
double explicit_output_variance(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var);

/// |mu|^2 Es / explicit_output_variance, linear scale.
double layer_sinr(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var, double es = 1.0);

/// E|w r_hat - s|^2 for target energy es and the given residual variances.
double filter_mse(std::span<const cd> w, const SubChannel& sub, std::span<const double> err_var, double noise_var, double es = 1.0);

struct Posterior {
  cd mean;
  double var = 0.0;
  int hard = 0;  // argmax of the posterior (nearest point without priors)
};

/// Posterior over the constellation for y = x + CN(0, v), with weights
/// proportional to exp(-|y - a|^2 / v) (times the prior when given).
Posterior dd_posterior(cd y, double v, const Constellation& c, std::span<const double> prior = {});

/// Full iterative detector.
DetectionResult detect_frame(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, const DetectorConfig& cfg,
                             const SymbolPriors* priors = nullptr);

}  // namespace otfs
