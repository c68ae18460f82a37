// Turbo receiver: soft demapping, LLR bookkeeping, interleaving and the
// detector/decoder loop.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otfs/detector.hpp"
#include "otfs/ldpc.hpp"

namespace otfs {

inline constexpr double kLlrLimit = 50.0;

/// Bit LLRs (log P0/P1, MSB-first per symbol) of y = x + CN(0, v).
/// `prior` optionally holds a-priori bit LLRs of the same layout; they enter
/// the symbol metric and are therefore part of the output. Clamped to +-50.
RVec llr_from_dd(std::span<const cd> y, std::span<const double> v, const Constellation& c, bool max_log = false,
                 std::span<const double> prior = {});

/// Same layout as llr_from_dd, but the metric for bit p omits bit p's own
/// prior. Equals llr_from_dd(...) - prior wherever neither side is clamped.
RVec extrinsic_llr_from_dd(std::span<const cd> y, std::span<const double> v, const Constellation& c, bool max_log = false,
                           std::span<const double> prior = {});

/// L_out - L_a.
RVec extrinsic(std::span<const double> l_out, std::span<const double> l_a);

/// Uniform random permutation. interleave(x)[i] = x[perm[i]].
class Interleaver {
 public:
  Interleaver(std::size_t n, std::uint64_t seed);
  const std::vector<std::size_t>& permutation() const { return perm_; }
  std::size_t size() const { return perm_.size(); }

  template <class T>
  std::vector<T> interleave(std::span<const T> x) const {
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) y[i] = x[perm_[i]];
    return y;
  }
  template <class T>
  std::vector<T> deinterleave(std::span<const T> y) const {
    std::vector<T> x(y.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) x[perm_[i]] = y[i];
    return x;
  }

 private:
  std::vector<std::size_t> perm_;
};

struct SoftSymbols {
  CVec mean;
  RVec var;
};

/// Label probabilities per symbol from a-priori bit LLRs: prod_p P(b_p).
SymbolPriors symbol_priors_from_llr(std::span<const double> llr, const Constellation& c);

/// Posterior mean / variance of each symbol under independent bit priors.
SoftSymbols soft_symbols_from_llr(std::span<const double> llr, const Constellation& c);

/// How coded and uncoded bits share one frame.
struct TurboLayout {
  int codewords = 0;
  int code_length = 0;
  int info_per_codeword = 0;
  std::size_t frame_bits = 0;  // data symbols x bits per symbol
  std::size_t coded_bits() const { return static_cast<std::size_t>(codewords) * static_cast<std::size_t>(code_length); }
  std::size_t leftover_bits() const { return frame_bits - coded_bits(); }
};

/// floor(frame data bits / code length) codewords; throws ConfigError when
/// not even one codeword fits.
TurboLayout turbo_layout(const FrameGeometry& g, const Constellation& c, const LdpcCode& code);

struct TurboConfig {
  int turbo_iterations = 2;
  DetectorConfig detector;
  int bp_iterations = 50;
  bool min_sum = false;
  bool max_log = false;
  /// Feed decoder posteriors (intrinsic) back; false feeds L_out_d - L_in.
  bool intrinsic_feedback = true;
  std::uint64_t interleaver_seed = 7;
};

struct TurboTransmission {
  DDFrame frame;
  std::vector<std::uint8_t> info_bits;      // all codewords, concatenated
  std::vector<std::uint8_t> coded_bits;     // codewords before interleaving
  std::vector<std::uint8_t> frame_bits;     // bits as mapped onto the frame
};

/// Interleaver used for codeword `index` under `seed`.
Interleaver codeword_interleaver(int code_length, std::uint64_t seed, int index);

/// Encodes random information bits and fills a frame; leftover positions carry random uncoded bits.
TurboTransmission turbo_transmit(const FrameGeometry& g, const Constellation& c, const LdpcCode& code, std::uint64_t interleaver_seed,
                                 Rng& rng);

struct TurboIteration {
  std::vector<std::uint8_t> info_bits;  // decoded information bits
  std::vector<std::uint8_t> raw_bits;   // detector hard decisions on coded positions (deinterleaved)
  int converged_codewords = 0;
  ComplexityCounter counter;
  RVec detector_llr;  // L_out of the detector, frame bit order
  RVec apriori_llr;   // L_a fed to the detector, frame bit order
  RVec extrinsic_llr; // detector extrinsic passed on to the decoder, frame bit order
  RVec feedback_llr;  // decoder output interleaved back to frame order (next L_a)
};

struct TurboResult {
  TurboLayout layout;
  std::vector<TurboIteration> iterations;
};

TurboResult turbo_receive(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, const LdpcCode& code,
                          const TurboConfig& cfg);

}  // namespace otfs
