// Binary LDPC codes: construction, alist I/O, systematic encoding and
// belief-propagation decoding. LLRs are log P(bit = 0) / P(bit = 1).
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "otfs/numeric.hpp"

namespace otfs {

struct LdpcDecodeResult {
  RVec llr;                        // posterior LLR per code bit
  std::vector<std::uint8_t> bits;  // hard decisions on llr
  bool converged = false;          // all parity checks satisfied
  int iterations = 0;              // BP iterations run
};

class LdpcCode {
 public:
  /// Regular (var_degree, check_degree) code of length n from a seeded
  /// socket permutation. Repeated edges are dropped, so a few nodes may end
  /// up with a lower degree.
  static LdpcCode regular(int n, int var_degree, int check_degree, std::uint64_t seed);
  /// The bundled desk-scale code: regular (3,6), length 1024.
  static LdpcCode bundled();
  static LdpcCode read_alist(std::istream& is);
  static LdpcCode load_alist(const std::string& path);

  LdpcCode(int n, std::vector<std::vector<int>> check_vars);

  void write_alist(std::ostream& os) const;

  int length() const { return n_; }
  int checks() const { return static_cast<int>(check_vars_.size()); }
  int info_length() const { return static_cast<int>(info_pos_.size()); }
  double rate() const { return static_cast<double>(info_length()) / n_; }

  const std::vector<std::vector<int>>& check_vars() const { return check_vars_; }
  const std::vector<std::vector<int>>& var_checks() const { return var_checks_; }
  /// Codeword positions carrying the information bits, in order.
  const std::vector<int>& info_positions() const { return info_pos_; }

  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;
  std::vector<std::uint8_t> extract_info(std::span<const std::uint8_t> codeword) const;
  bool satisfies_checks(std::span<const std::uint8_t> word) const;

  /// Sum-product (or min-sum) flooding BP with early exit once all checks hold.
  LdpcDecodeResult decode(std::span<const double> llr, int max_iterations = 50, bool min_sum = false) const;

 private:
  void build_encoder();

  int n_ = 0;
  std::vector<std::vector<int>> check_vars_;
  std::vector<std::vector<int>> var_checks_;
  std::vector<int> info_pos_;
  // For each pivot: its codeword position and the info indices it sums.
  std::vector<int> pivot_pos_;
  std::vector<std::vector<int>> pivot_terms_;
};

}  // namespace otfs
