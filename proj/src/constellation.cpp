#include "otfs/constellation.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace otfs {

namespace {

// Gray PAM level for `nbits` axis bits (MSB first).
double pam_level(int axis_bits, int nbits) {
  if (nbits == 1) return axis_bits == 0 ? 1.0 : -1.0;
  const int sign_bit = (axis_bits >> 1) & 1;
  const int mag_bit = axis_bits & 1;
  return (sign_bit == 0 ? 1.0 : -1.0) * (mag_bit == 0 ? 1.0 : 3.0);
}

}  // namespace

Constellation::Constellation(int order, double es) : es_(es) {
  if (order != 4 && order != 16) throw ConfigError("constellation order must be 4 or 16, got " + std::to_string(order));
  if (!(es > 0.0)) throw ConfigError("symbol energy must be positive");
  bits_ = order == 4 ? 2 : 4;
  const int half = bits_ / 2;
  const double scale = std::sqrt(es / (order == 4 ? 2.0 : 10.0));
  points_.resize(static_cast<std::size_t>(order));
  for (int label = 0; label < order; ++label) {
    const int ibits = label >> half;
    const int qbits = label & ((1 << half) - 1);
    points_[static_cast<std::size_t>(label)] = scale * cd(pam_level(ibits, half), pam_level(qbits, half));
  }
}

int Constellation::nearest(cd y) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < order(); ++k) {
    const double d = std::norm(y - points_[static_cast<std::size_t>(k)]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

CVec Constellation::map(std::span<const std::uint8_t> bits) const {
  if (bits.size() % static_cast<std::size_t>(bits_) != 0) throw Error("qam_map: bit count not divisible by bits per symbol");
  CVec out(bits.size() / static_cast<std::size_t>(bits_));
  for (std::size_t s = 0; s < out.size(); ++s) {
    int label = 0;
    for (int p = 0; p < bits_; ++p) label = (label << 1) | (bits[s * static_cast<std::size_t>(bits_) + static_cast<std::size_t>(p)] & 1);
    out[s] = points_[static_cast<std::size_t>(label)];
  }
  return out;
}

void Constellation::label_bits(int label, std::vector<std::uint8_t>& out) const {
  for (int p = 0; p < bits_; ++p) out.push_back(static_cast<std::uint8_t>(bit(label, p)));
}

std::vector<std::uint8_t> Constellation::unmap_hard(std::span<const cd> symbols) const {
  std::vector<std::uint8_t> out;
  out.reserve(symbols.size() * static_cast<std::size_t>(bits_));
  for (const cd& y : symbols) label_bits(nearest(y), out);
  return out;
}

}  // namespace otfs
