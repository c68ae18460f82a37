#include "otfs/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace otfs {

namespace {

constexpr double kLlrClamp = 50.0;

double clamp_llr(double x) { return std::clamp(x, -kLlrClamp, kLlrClamp); }

// Packed GF(2) row.
struct BitRow {
  std::vector<std::uint64_t> w;
  explicit BitRow(int n) : w(static_cast<std::size_t>((n + 63) / 64), 0) {}
  bool get(int i) const { return (w[static_cast<std::size_t>(i) / 64] >> (i % 64)) & 1u; }
  void set(int i) { w[static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64); }
  void xor_with(const BitRow& o) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] ^= o.w[k];
  }
};

std::vector<int> read_int_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::vector<int> out;
    int v;
    while (ss >> v) out.push_back(v);
    if (!out.empty()) return out;
  }
  throw Error("alist: unexpected end of file");
}

}  // namespace

LdpcCode::LdpcCode(int n, std::vector<std::vector<int>> check_vars) : n_(n), check_vars_(std::move(check_vars)) {
  if (n_ <= 0) throw ConfigError("LDPC length must be positive");
  var_checks_.assign(static_cast<std::size_t>(n_), {});
  for (std::size_t c = 0; c < check_vars_.size(); ++c) {
    auto& row = check_vars_[c];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (int v : row) {
      if (v < 0 || v >= n_) throw ConfigError("LDPC check references variable out of range");
      var_checks_[static_cast<std::size_t>(v)].push_back(static_cast<int>(c));
    }
  }
  build_encoder();
}

LdpcCode LdpcCode::regular(int n, int var_degree, int check_degree, std::uint64_t seed) {
  if (n <= 0 || var_degree <= 0 || check_degree <= 0 || (n * var_degree) % check_degree != 0)
    throw ConfigError("regular LDPC: n * var_degree must be divisible by check_degree");
  const int m = n * var_degree / check_degree;
  std::vector<int> sockets(static_cast<std::size_t>(n * var_degree));
  for (int i = 0; i < n * var_degree; ++i) sockets[static_cast<std::size_t>(i)] = i / var_degree;
  Rng rng(seed, 0x1d9c);
  std::shuffle(sockets.begin(), sockets.end(), rng.engine());
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c)
    for (int k = 0; k < check_degree; ++k) rows[static_cast<std::size_t>(c)].push_back(sockets[static_cast<std::size_t>(c * check_degree + k)]);
  return LdpcCode(n, std::move(rows));
}

LdpcCode LdpcCode::bundled() { return regular(1024, 3, 6, 20240611); }

void LdpcCode::build_encoder() {
  const int m = checks();
  std::vector<BitRow> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (const auto& cv : check_vars_) {
    BitRow r(n_);
    for (int v : cv) r.set(v);
    rows.push_back(std::move(r));
  }
  // Reduced row echelon form.
  std::vector<int> pivots;
  int rank = 0;
  for (int col = 0; col < n_ && rank < m; ++col) {
    int sel = -1;
    for (int r = rank; r < m; ++r)
      if (rows[static_cast<std::size_t>(r)].get(col)) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(sel)]);
    for (int r = 0; r < m; ++r)
      if (r != rank && rows[static_cast<std::size_t>(r)].get(col)) rows[static_cast<std::size_t>(r)].xor_with(rows[static_cast<std::size_t>(rank)]);
    pivots.push_back(col);
    ++rank;
  }
  std::vector<char> is_pivot(static_cast<std::size_t>(n_), 0);
  for (int p : pivots) is_pivot[static_cast<std::size_t>(p)] = 1;
  info_pos_.clear();
  std::vector<int> info_index(static_cast<std::size_t>(n_), -1);
  for (int v = 0; v < n_; ++v)
    if (!is_pivot[static_cast<std::size_t>(v)]) {
      info_index[static_cast<std::size_t>(v)] = static_cast<int>(info_pos_.size());
      info_pos_.push_back(v);
    }
  pivot_pos_ = pivots;
  pivot_terms_.assign(pivots.size(), {});
  for (std::size_t r = 0; r < pivots.size(); ++r)
    for (int v : info_pos_)
      if (rows[r].get(v)) pivot_terms_[r].push_back(info_index[static_cast<std::size_t>(v)]);
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> info) const {
  if (info.size() != info_pos_.size()) throw Error("LDPC encode: wrong number of information bits");
  std::vector<std::uint8_t> cw(static_cast<std::size_t>(n_), 0);
  for (std::size_t i = 0; i < info_pos_.size(); ++i) cw[static_cast<std::size_t>(info_pos_[i])] = info[i] & 1u;
  for (std::size_t r = 0; r < pivot_pos_.size(); ++r) {
    std::uint8_t s = 0;
    for (int t : pivot_terms_[r]) s ^= info[static_cast<std::size_t>(t)] & 1u;
    cw[static_cast<std::size_t>(pivot_pos_[r])] = s;
  }
  return cw;
}

std::vector<std::uint8_t> LdpcCode::extract_info(std::span<const std::uint8_t> codeword) const {
  if (codeword.size() != static_cast<std::size_t>(n_)) throw Error("LDPC extract_info: wrong length");
  std::vector<std::uint8_t> out(info_pos_.size());
  for (std::size_t i = 0; i < info_pos_.size(); ++i) out[i] = codeword[static_cast<std::size_t>(info_pos_[i])];
  return out;
}

bool LdpcCode::satisfies_checks(std::span<const std::uint8_t> word) const {
  if (word.size() != static_cast<std::size_t>(n_)) throw Error("LDPC check: wrong length");
  for (const auto& cv : check_vars_) {
    std::uint8_t s = 0;
    for (int v : cv) s ^= word[static_cast<std::size_t>(v)] & 1u;
    if (s) return false;
  }
  return true;
}

LdpcDecodeResult LdpcCode::decode(std::span<const double> llr, int max_iterations, bool min_sum) const {
  if (llr.size() != static_cast<std::size_t>(n_)) throw Error("LDPC decode: wrong LLR length");
  LdpcDecodeResult res;
  res.llr.resize(static_cast<std::size_t>(n_));
  res.bits.resize(static_cast<std::size_t>(n_));
  RVec ch(static_cast<std::size_t>(n_));
  for (int v = 0; v < n_; ++v) ch[static_cast<std::size_t>(v)] = std::isnan(llr[static_cast<std::size_t>(v)]) ? 0.0 : clamp_llr(llr[static_cast<std::size_t>(v)]);

  // Edge storage laid out by check; var_edge maps (var, k) to the edge id.
  std::vector<std::size_t> check_start(check_vars_.size() + 1, 0);
  for (std::size_t c = 0; c < check_vars_.size(); ++c) check_start[c + 1] = check_start[c] + check_vars_[c].size();
  const std::size_t edges = check_start.back();
  std::vector<int> edge_var(edges);
  std::vector<std::vector<std::size_t>> var_edges(static_cast<std::size_t>(n_));
  for (std::size_t c = 0; c < check_vars_.size(); ++c)
    for (std::size_t k = 0; k < check_vars_[c].size(); ++k) {
      edge_var[check_start[c] + k] = check_vars_[c][k];
      var_edges[static_cast<std::size_t>(check_vars_[c][k])].push_back(check_start[c] + k);
    }
  RVec v2c(edges), c2v(edges, 0.0);

  auto harden = [&]() {
    for (int v = 0; v < n_; ++v) {
      double s = ch[static_cast<std::size_t>(v)];
      for (std::size_t e : var_edges[static_cast<std::size_t>(v)]) s += c2v[e];
      res.llr[static_cast<std::size_t>(v)] = clamp_llr(s);
      res.bits[static_cast<std::size_t>(v)] = s < 0.0 ? 1 : 0;
    }
    return satisfies_checks(res.bits);
  };

  res.converged = harden();
  std::vector<double> tanhs;
  for (int it = 0; it < max_iterations && !res.converged; ++it) {
    for (int v = 0; v < n_; ++v) {
      const double total = res.llr[static_cast<std::size_t>(v)];
      for (std::size_t e : var_edges[static_cast<std::size_t>(v)]) v2c[e] = clamp_llr(total - c2v[e]);
    }
    for (std::size_t c = 0; c < check_vars_.size(); ++c) {
      const std::size_t b = check_start[c], d = check_start[c + 1] - b;
      if (min_sum) {
        double min1 = INFINITY, min2 = INFINITY;
        std::size_t argmin = 0;
        int sign = 1;
        for (std::size_t k = 0; k < d; ++k) {
          const double x = v2c[b + k];
          if (x < 0) sign = -sign;
          const double a = std::abs(x);
          if (a < min1) {
            min2 = min1;
            min1 = a;
            argmin = k;
          } else if (a < min2) {
            min2 = a;
          }
        }
        for (std::size_t k = 0; k < d; ++k) {
          const int s = v2c[b + k] < 0 ? -sign : sign;
          c2v[b + k] = s * (k == argmin ? min2 : min1);
        }
        continue;
      }
      tanhs.resize(d);
      for (std::size_t k = 0; k < d; ++k) tanhs[k] = std::tanh(0.5 * v2c[b + k]);
      for (std::size_t k = 0; k < d; ++k) {
        double p = 1.0;
        for (std::size_t j = 0; j < d; ++j)
          if (j != k) p *= tanhs[j];
        p = std::clamp(p, -1.0 + 1e-15, 1.0 - 1e-15);
        c2v[b + k] = clamp_llr(2.0 * std::atanh(p));
      }
    }
    res.iterations = it + 1;
    res.converged = harden();
  }
  return res;
}

void LdpcCode::write_alist(std::ostream& os) const {
  std::size_t max_col = 0, max_row = 0;
  for (const auto& vc : var_checks_) max_col = std::max(max_col, vc.size());
  for (const auto& cv : check_vars_) max_row = std::max(max_row, cv.size());
  os << n_ << ' ' << checks() << '\n' << max_col << ' ' << max_row << '\n';
  for (std::size_t v = 0; v < var_checks_.size(); ++v) os << var_checks_[v].size() << (v + 1 < var_checks_.size() ? " " : "\n");
  for (std::size_t c = 0; c < check_vars_.size(); ++c) os << check_vars_[c].size() << (c + 1 < check_vars_.size() ? " " : "\n");
  auto write_lists = [&os](const std::vector<std::vector<int>>& lists, std::size_t width) {
    for (const auto& l : lists) {
      for (std::size_t k = 0; k < width; ++k) {
        if (k) os << ' ';
        os << (k < l.size() ? l[k] + 1 : 0);
      }
      os << '\n';
    }
  };
  write_lists(var_checks_, max_col);
  write_lists(check_vars_, max_row);
}

LdpcCode LdpcCode::read_alist(std::istream& is) {
  const auto dims = read_int_line(is);
  if (dims.size() < 2 || dims[0] <= 0 || dims[1] <= 0) throw ConfigError("alist: bad dimension line");
  const int n = dims[0], m = dims[1];
  read_int_line(is);  // maximum degrees
  const auto col_deg = read_int_line(is);
  const auto row_deg = read_int_line(is);
  if (col_deg.size() != static_cast<std::size_t>(n) || row_deg.size() != static_cast<std::size_t>(m))
    throw ConfigError("alist: degree lists do not match dimensions");
  // Variable lists are redundant with the check lists; read them to advance.
  for (int v = 0; v < n; ++v) read_int_line(is);
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    for (int x : read_int_line(is))
      if (x > 0) rows[static_cast<std::size_t>(c)].push_back(x - 1);
    if (rows[static_cast<std::size_t>(c)].size() != static_cast<std::size_t>(row_deg[static_cast<std::size_t>(c)]))
      throw ConfigError("alist: check " + std::to_string(c + 1) + " degree mismatch");
  }
  return LdpcCode(n, std::move(rows));
}

LdpcCode LdpcCode::load_alist(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open alist file '" + path + "'");
  return read_alist(f);
}

}  // namespace otfs
