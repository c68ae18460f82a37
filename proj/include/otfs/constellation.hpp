#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otfs/numeric.hpp"

namespace otfs {

/// Gray-labeled square QAM with unit average energy (scaled by `es`).
///
/// Labels are read MSB first. The first half of the bits selects the
/// in-phase level, the second half the quadrature level. Each axis uses
/// the PAM Gray table
///
///     4QAM  (1 bit/axis):  0 -> +1, 1 -> -1                  (x 1/sqrt(2))
///     16QAM (2 bits/axis): 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3  (x 1/sqrt(10))
///
/// so label 00 of 4QAM is (+1+j)/sqrt(2) and label 0000 of 16QAM is
/// (+1+j)/sqrt(10). Point index == label value.
class Constellation {
 public:
  /// `order` must be 4 or 16.
  explicit Constellation(int order, double es = 1.0);

  int order() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bits_; }
  double es() const { return es_; }

  std::span<const cd> points() const { return points_; }
  const cd& point(int label) const { return points_[static_cast<std::size_t>(label)]; }

  /// Bit p (0 = MSB) of the label of point `label`.
  int bit(int label, int p) const { return (label >> (bits_ - 1 - p)) & 1; }

  /// Nearest point; ties resolve to the lowest label.
  int nearest(cd y) const;

  /// Maps a bit sequence (size divisible by bits_per_symbol) to symbols.
  CVec map(std::span<const std::uint8_t> bits) const;

  /// Appends the label bits of `label` to `out`.
  void label_bits(int label, std::vector<std::uint8_t>& out) const;

  /// Hard decision per symbol followed by label bits.
  std::vector<std::uint8_t> unmap_hard(std::span<const cd> symbols) const;

 private:
  int bits_;
  double es_;
  std::vector<cd> points_;
};

}  // namespace otfs
