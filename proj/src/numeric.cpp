#include "otfs/numeric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace otfs {

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) out(c, r) = std::conj((*this)(r, c));
  return out;
}

CVec CMatrix::operator*(std::span<const cd> v) const {
  if (v.size() != cols_) throw Error("CMatrix * vector: dimension mismatch");
  CVec out(rows_);
  for (std::size_t c = 0; c < cols_; ++c) {
    const cd x = v[c];
    if (x == cd{}) continue;
    const cd* colp = data_.data() + c * rows_;
    for (std::size_t r = 0; r < rows_; ++r) out[r] += colp[r] * x;
  }
  return out;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw Error("CMatrix * CMatrix: dimension mismatch");
  CMatrix out(rows_, rhs.cols_);
  for (std::size_t c = 0; c < rhs.cols_; ++c)
    for (std::size_t k = 0; k < cols_; ++k) {
      const cd x = rhs(k, c);
      if (x == cd{}) continue;
      for (std::size_t r = 0; r < rows_; ++r) out(r, c) += (*this)(r, k) * x;
    }
  return out;
}

double norm2(std::span<const cd> v) {
  double s = 0.0;
  for (const cd& x : v) s += std::norm(x);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

void fft_radix2(std::span<cd> a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const cd wlen(std::cos(ang), std::sin(ang));
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      cd w(1.0, 0.0);
      for (std::size_t k = 0; k < half; ++k) {
        // Exact twiddles every 16 steps keep the recurrence drift below 1e-15.
        if ((k & 15) == 0 && k != 0) {
          const double a_k = ang * static_cast<double>(k);
          w = cd(std::cos(a_k), std::sin(a_k));
        }
        const cd u = a[i + k];
        const cd v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
        w *= wlen;
      }
    }
  }
}

void dft_direct(std::span<cd> a, bool inverse) {
  const std::size_t n = a.size();
  const CVec in(a.begin(), a.end());
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    cd acc{};
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t idx = (k * t) % n;
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(n);
      acc += in[t] * cd(std::cos(ang), std::sin(ang));
    }
    a[k] = acc;
  }
}

}  // namespace

void dft_inplace(std::span<cd> v, bool inverse) {
  if (v.empty()) throw Error("dft: zero-length input");
  if (std::has_single_bit(v.size()))
    fft_radix2(v, inverse);
  else
    dft_direct(v, inverse);
  const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
  for (cd& x : v) x *= scale;
}

CVec dft(std::span<const cd> v, bool inverse) {
  CVec out(v.begin(), v.end());
  dft_inplace(out, inverse);
  return out;
}

// ---------------------------------------------------------------------------

void Cholesky::factor(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw Error("Cholesky: matrix must be square and non-empty");
  n_ = a.rows();
  l_.assign(n_ * n_, cd{});
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n_; ++i) max_diag = std::max(max_diag, std::abs(a(i, i).real()));
  const double tol = 1e-14 * std::max(max_diag, 1e-300);

  auto L = [this](std::size_t r, std::size_t c) -> cd& { return l_[c * n_ + r]; };
  for (std::size_t j = 0; j < n_; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(L(j, k));
    if (!(d > tol)) throw NotPositiveDefinite("hpd_solve: matrix is not Hermitian positive definite (pivot " + std::to_string(j) + ")");
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      cd s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * std::conj(L(j, k));
      L(i, j) = s / ljj;
    }
  }
}

void Cholesky::solve_inplace(std::span<cd> b) const {
  if (b.size() != n_) throw Error("Cholesky::solve: dimension mismatch");
  // L y = b
  for (std::size_t i = 0; i < n_; ++i) {
    cd s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_[k * n_ + i] * b[k];
    b[i] = s / l_[i * n_ + i].real();
  }
  // L^H x = y
  for (std::size_t ii = n_; ii-- > 0;) {
    cd s = b[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= std::conj(l_[ii * n_ + k]) * b[k];
    b[ii] = s / l_[ii * n_ + ii].real();
  }
}

CVec Cholesky::solve(std::span<const cd> b) const {
  CVec x(b.begin(), b.end());
  solve_inplace(x);
  return x;
}

CVec hpd_solve(const CMatrix& a, std::span<const cd> b) {
  Cholesky chol(a);
  return chol.solve(b);
}

// ---------------------------------------------------------------------------

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  // sin(pi k) is not exactly zero in floating point; integers are exact zeros.
  if (x == std::round(x)) return 0.0;
  return std::sin(px) / px;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(seeded_engine(seed, stream)) {}

Rng Rng::fork(std::uint64_t child) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream_)), child);
}

double Rng::uniform() { return std::generate_canonical<double, 53>(engine_); }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() { return normal_(engine_); }

cd Rng::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {s * re, s * im};
}

}  // namespace otfs
