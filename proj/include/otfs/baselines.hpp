// Reference detectors used for comparison and as test oracles.
#pragma once

#include <span>

#include "otfs/channel.hpp"
#include "otfs/constellation.hpp"
#include "otfs/detector.hpp"

namespace otfs {

struct MrcResult {
  std::vector<int> labels;  // DDFrame::fill_data order
  CVec symbols;
  ComplexityCounter counter;  // complex_mults counts branch combinations
};

/// Iterative delay-branch maximal-ratio combining (RAKE) with hard decisions
/// in the delay-Doppler domain. Starts from all-zero estimates.
MrcResult mrc_detect(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, int iterations);

/// Dense linear MMSE estimate for one block: V H^H (H V H^H + noise_var I)^{-1} r.
/// `prior_var` holds the diagonal of V. Throws ConfigError for sizes above 256.
CVec full_lmmse_oracle(std::span<const cd> r, const CMatrix& H, std::span<const double> prior_var, double noise_var);

}  // namespace otfs
