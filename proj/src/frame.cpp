#include "otfs/frame.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

namespace otfs {

void FrameGeometry::validate() const {
  if (M < 2) throw ConfigError("geometry.M must be >= 2");
  if (N < 1) throw ConfigError("geometry.N must be >= 1");
  if (l_max <= 0 || l_max >= M) throw ConfigError("geometry.l_max must satisfy 0 < l_max < M");
  if (!(delta_f > 0.0)) throw ConfigError("geometry.delta_f must be positive");
}

DDFrame::DDFrame(const FrameGeometry& g) : geom_(g), grid_(g.size()) { g.validate(); }

void DDFrame::set(int m, int n, cd value) {
  if (m < 0 || m >= geom_.M || n < 0 || n >= geom_.N) throw Error("DDFrame::set: index out of range");
  if (geom_.is_pad_row(m)) throw Error("DDFrame::set: row lies in the zero pad");
  grid_[geom_.index(m, n)] = value;
}

void DDFrame::fill_data(std::span<const cd> symbols) {
  if (symbols.size() != geom_.data_symbols()) throw Error("DDFrame::fill_data: wrong symbol count");
  const int rows = geom_.data_rows();
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const int m = static_cast<int>(k % static_cast<std::size_t>(rows));
    const int n = static_cast<int>(k / static_cast<std::size_t>(rows));
    grid_[geom_.index(m, n)] = symbols[k];
  }
}

CVec DDFrame::data() const {
  CVec out(geom_.data_symbols());
  const int rows = geom_.data_rows();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = grid_[geom_.index(static_cast<int>(k % static_cast<std::size_t>(rows)), static_cast<int>(k / static_cast<std::size_t>(rows)))];
  return out;
}

bool DDFrame::pad_is_zero() const {
  for (int n = 0; n < geom_.N; ++n)
    for (int m = geom_.data_rows(); m < geom_.M; ++m)
      if (grid_[geom_.index(m, n)] != cd{}) return false;
  return true;
}

TimeSignal idzt_transmit(const DDFrame& frame) {
  const auto& g = frame.geometry();
  TimeSignal s{g, CVec(g.size())};
  CVec row(static_cast<std::size_t>(g.N));
  for (int m = 0; m < g.M; ++m) {
    if (g.is_pad_row(m)) continue;  // pad rows transform to zero samples
    for (int n = 0; n < g.N; ++n) row[static_cast<std::size_t>(n)] = frame.at(m, n);
    dft_inplace(row, /*inverse=*/true);
    for (int n = 0; n < g.N; ++n) s.samples[g.index(m, n)] = row[static_cast<std::size_t>(n)];
  }
  return s;
}

TimeSignal isfft_heisenberg_transmit(const DDFrame& frame) {
  const auto& g = frame.geometry();
  const auto M = static_cast<std::size_t>(g.M);
  const auto N = static_cast<std::size_t>(g.N);
  // X_TF = F_M * X_DD * F_N^H
  CVec tf(frame.grid().begin(), frame.grid().end());
  CVec buf(M);
  for (std::size_t n = 0; n < N; ++n) {
    std::span<cd> column(tf.data() + n * M, M);
    dft_inplace(column, false);
  }
  buf.resize(N);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t n = 0; n < N; ++n) buf[n] = tf[m + M * n];
    dft_inplace(buf, true);
    for (std::size_t n = 0; n < N; ++n) tf[m + M * n] = buf[n];
  }
  // Heisenberg with rectangular pulse: s = vec(G_tx * F_M^H * X_TF), G_tx = I.
  TimeSignal s{g, std::move(tf)};
  for (std::size_t n = 0; n < N; ++n) {
    std::span<cd> column(s.samples.data() + n * M, M);
    dft_inplace(column, true);
  }
  return s;
}

DDFrame dzt_receive(const TimeSignal& signal) {
  const auto& g = signal.geometry;
  DDFrame out(g);
  CVec row(static_cast<std::size_t>(g.N));
  for (int m = 0; m < g.data_rows(); ++m) {
    for (int n = 0; n < g.N; ++n) row[static_cast<std::size_t>(n)] = signal.at(m, n);
    dft_inplace(row, false);
    for (int n = 0; n < g.N; ++n) out.set(m, n, row[static_cast<std::size_t>(n)]);
  }
  return out;
}

LayerDD layer_to_dd(std::span<const cd> est, std::span<const double> variances) {
  if (est.size() != variances.size()) throw Error("layer_to_dd: length mismatch");
  return {dft(est, false), RVec(variances.begin(), variances.end())};
}

LayerTime dd_to_layer(std::span<const cd> dd_syms, std::span<const double> dd_var) {
  if (dd_syms.size() != dd_var.size()) throw Error("dd_to_layer: length mismatch");
  const double mean = std::accumulate(dd_var.begin(), dd_var.end(), 0.0) / static_cast<double>(dd_var.size());
  return {dft(dd_syms, true), RVec(dd_var.size(), mean)};
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw Error("read_frame: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_frame(std::ostream& os, const DDFrame& frame) {
  const auto& g = frame.geometry();
  os.write(kFrameMagic, 16);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.M));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.N));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.l_max));
  for (int m = 0; m < g.M; ++m)
    for (int n = 0; n < g.N; ++n) {
      put_le<double>(os, frame.at(m, n).real());
      put_le<double>(os, frame.at(m, n).imag());
    }
}

DDFrame read_frame(std::istream& is, double delta_f) {
  char magic[16];
  if (!is.read(magic, 16) || std::memcmp(magic, kFrameMagic, 16) != 0) throw Error("read_frame: bad magic header");
  FrameGeometry g;
  g.M = static_cast<int>(get_le<std::uint32_t>(is));
  g.N = static_cast<int>(get_le<std::uint32_t>(is));
  g.l_max = static_cast<int>(get_le<std::uint32_t>(is));
  g.delta_f = delta_f;
  DDFrame frame(g);
  for (int m = 0; m < g.M; ++m)
    for (int n = 0; n < g.N; ++n) {
      const double re = get_le<double>(is);
      const double im = get_le<double>(is);
      if (g.is_pad_row(m)) {
        if (re != 0.0 || im != 0.0) throw Error("read_frame: nonzero entry in zero pad");
        continue;
      }
      frame.set(m, n, {re, im});
    }
  return frame;
}

}  // namespace otfs
