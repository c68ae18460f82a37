// Numeric building blocks shared by every module: complex containers, the
// unitary DFT, small Hermitian positive-definite solves, sinc, and seeded
// random streams.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

using cd = std::complex<double>;
using CVec = std::vector<cd>;
using RVec = std::vector<double>;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (CLI maps this to exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised by hpd_solve when the Cholesky factorization meets a non-positive
/// pivot. Inputs are never regularized silently.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// Dense column-major complex matrix. Sized for sub-channel windows and
/// desk-scale oracles, not for large linear algebra.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cd& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  const cd& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<cd> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const cd> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, cd{});
  }

  CMatrix adjoint() const;
  CVec operator*(std::span<const cd> v) const;
  CMatrix operator*(const CMatrix& rhs) const;

  const std::vector<cd>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cd> data_;
};

double norm2(std::span<const cd> v);  // squared Euclidean norm

// ---------------------------------------------------------------------------
// DFT

/// Unitary DFT (1/sqrt(N) scaling). `inverse` selects F^H. Power-of-two
/// lengths use an iterative radix-2 FFT, other lengths a direct O(N^2) sum.
CVec dft(std::span<const cd> v, bool inverse = false);

/// In-place variant, same conventions.
void dft_inplace(std::span<cd> v, bool inverse = false);

// ---------------------------------------------------------------------------
// Hermitian positive-definite solves

/// Cholesky factor A = L L^H of a Hermitian positive-definite matrix. Only the
/// lower triangle of A is read.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const CMatrix& a) { factor(a); }

  /// Throws NotPositiveDefinite on a pivot <= eps * max diagonal.
  void factor(const CMatrix& a);
  void solve_inplace(std::span<cd> b) const;
  CVec solve(std::span<const cd> b) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<cd> l_;  // column-major lower factor
};

/// Solves A x = b for Hermitian positive-definite A.
CVec hpd_solve(const CMatrix& a, std::span<const cd> b);

// ---------------------------------------------------------------------------

/// Normalized sinc: sin(pi x) / (pi x), sinc(0) = 1.
double sinc(double x);

/// Seeded random stream. Identical (seed, stream) pairs produce identical
/// sequences; `fork` derives an independent child stream for parallel work.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  Rng fork(std::uint64_t child) const;

  double uniform();                         // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal();                          // N(0, 1)
  cd complex_normal(double variance);       // CN(0, variance)
  std::uint64_t next_u64() { return engine_(); }
  int bit() { return static_cast<int>(engine_() >> 63); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace otfs
