// Zero-padded delay-Doppler frame layout and the transforms between the
// delay-Doppler grid and the time-domain sample stream.
//
// Indexing is 0-based throughout: delay bin m in [0, M), Doppler bin n in
// [0, N). The last l_max delay rows are the zero pad. Both the DD grid and
// the time signal are stored with the delay index fastest, i.e. element
// (m, n) lives at m + M * n. For the time signal this is sample m of block
// n, matching s = vec(X_DD * F_N^H).
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "otfs/numeric.hpp"

namespace otfs {

struct FrameGeometry {
  int M = 64;                 // delay bins / subcarriers
  int N = 16;                 // Doppler bins / time slots
  int l_max = 7;              // zero-pad length in delay taps
  double delta_f = 15e3;      // subcarrier spacing [Hz]

  double symbol_period() const { return 1.0 / delta_f; }                      // T
  double sample_interval() const { return symbol_period() / M; }              // T / M
  int data_rows() const { return M - l_max; }
  std::size_t size() const { return static_cast<std::size_t>(M) * static_cast<std::size_t>(N); }
  std::size_t data_symbols() const { return static_cast<std::size_t>(data_rows()) * static_cast<std::size_t>(N); }
  std::size_t index(int m, int n) const { return static_cast<std::size_t>(m) + static_cast<std::size_t>(M) * static_cast<std::size_t>(n); }
  bool is_pad_row(int m) const { return m >= data_rows(); }

  /// Throws ConfigError unless 0 < l_max < M, N >= 1 and delta_f > 0.
  void validate() const;

  bool operator==(const FrameGeometry&) const = default;
};

/// M x N delay-Doppler symbol grid. Pad rows are kept at exactly zero.
class DDFrame {
 public:
  explicit DDFrame(const FrameGeometry& g);

  const FrameGeometry& geometry() const { return geom_; }
  cd at(int m, int n) const { return grid_[geom_.index(m, n)]; }
  /// Throws if (m, n) lies in the zero pad.
  void set(int m, int n, cd value);

  std::span<const cd> grid() const { return grid_; }

  /// Fills data rows in (n-major, m-minor) order from `symbols`, which must
  /// hold exactly data_symbols() entries. Symbol k goes to row k % (M-l_max),
  /// column k / (M-l_max).
  void fill_data(std::span<const cd> symbols);
  /// Inverse of fill_data.
  CVec data() const;

  /// True when every pad entry is exactly zero.
  bool pad_is_zero() const;
  double energy() const { return norm2(grid_); }

 private:
  FrameGeometry geom_;
  CVec grid_;
};

/// Time-domain frame, N blocks of M samples.
struct TimeSignal {
  FrameGeometry geometry;
  CVec samples;  // samples[n*M + m] = s_{n,m}

  std::span<cd> block(int n) { return {samples.data() + static_cast<std::size_t>(n) * geometry.M, static_cast<std::size_t>(geometry.M)}; }
  std::span<const cd> block(int n) const { return {samples.data() + static_cast<std::size_t>(n) * geometry.M, static_cast<std::size_t>(geometry.M)}; }
  cd at(int m, int n) const { return samples[geometry.index(m, n)]; }
};

/// Live transmit path: per-delay-row N-point IDFT (inverse Zak transform).
TimeSignal idzt_transmit(const DDFrame& frame);

/// ISFFT followed by the Heisenberg transform with a rectangular pulse
/// (G_tx = I). Kept as an independent cross-check of idzt_transmit.
TimeSignal isfft_heisenberg_transmit(const DDFrame& frame);

/// Receive-side DZT of a signal (per-delay-row N-point DFT). Inverse of
/// idzt_transmit.
DDFrame dzt_receive(const TimeSignal& signal);

struct LayerDD {
  CVec obs;   // F_N * est
  RVec var;   // carried through unchanged
};

/// Moves one delay layer (length N across blocks) into the Doppler domain.
LayerDD layer_to_dd(std::span<const cd> est, std::span<const double> variances);

struct LayerTime {
  CVec est;  // F_N^H * dd_syms
  RVec var;  // diagonal of F_N^H diag(dd_var) F_N = mean(dd_var)
};

/// Moves DD-domain posteriors of one layer back to the time domain. The
/// off-diagonal covariance terms are dropped.
LayerTime dd_to_layer(std::span<const cd> dd_syms, std::span<const double> dd_var);

// ---------------------------------------------------------------------------
// Debug serialization.
//
// Layout (all integers little-endian):
//   bytes  0..15  magic "OTFS-DDFRAME-v1\n"
//   bytes 16..27  uint32 M, uint32 N, uint32 l_max
//   then M*N pairs of IEEE-754 binary64 (re, im), little-endian, row-major:
//   row m = 0..M-1, within a row column n = 0..N-1.
// delta_f is not stored; readers supply it.

inline constexpr char kFrameMagic[17] = "OTFS-DDFRAME-v1\n";

void write_frame(std::ostream& os, const DDFrame& frame);
DDFrame read_frame(std::istream& is, double delta_f = 15e3);

}  // namespace otfs
