#include "otfs/turbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace otfs {

namespace {

double clamp_llr(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, -kLlrLimit, kLlrLimit);
}

// log P(b = 0) and log P(b = 1) from an LLR, computed without overflow.
double log_p0(double l) { return -std::log1p(std::exp(-std::abs(l))) - std::max(0.0, -l); }
double log_p1(double l) { return log_p0(-l); }

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

namespace {

// Shared kernel. With `exclude_own` the prior of bit p is left out of the
// metric used for bit p, which yields the extrinsic LLR without forming the
// difference of two clamped values.
RVec bit_llrs(std::span<const cd> y, std::span<const double> v, const Constellation& c, bool max_log, std::span<const double> prior,
              bool exclude_own) {
  if (y.size() != v.size()) throw Error("llr_from_dd: observation/variance length mismatch");
  const int q = c.order(), bps = c.bits_per_symbol();
  if (!prior.empty() && prior.size() != y.size() * static_cast<std::size_t>(bps)) throw Error("llr_from_dd: prior length mismatch");
  RVec out(y.size() * static_cast<std::size_t>(bps));
  std::vector<double> metric(static_cast<std::size_t>(q));
  const double ninf = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < y.size(); ++s) {
    const double var = std::max(v[s], 1e-300);
    for (int a = 0; a < q; ++a) {
      double m = -std::norm(y[s] - c.point(a)) / var;
      if (!prior.empty())
        for (int p = 0; p < bps; ++p) {
          const double l = clamp_llr(prior[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(p)]);
          m += c.bit(a, p) ? log_p1(l) : log_p0(l);
        }
      metric[static_cast<std::size_t>(a)] = m;
    }
    for (int p = 0; p < bps; ++p) {
      double l0 = ninf, l1 = ninf;
      const double own = prior.empty() || !exclude_own ? 0.0 : clamp_llr(prior[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(p)]);
      for (int a = 0; a < q; ++a) {
        double m = metric[static_cast<std::size_t>(a)];
        if (own != 0.0) m -= c.bit(a, p) ? log_p1(own) : log_p0(own);
        double& acc = c.bit(a, p) ? l1 : l0;
        acc = max_log ? std::max(acc, m) : log_add(acc, m);
      }
      double l;
      if (l0 == ninf && l1 == ninf)
        l = 0.0;
      else if (l1 == ninf)
        l = kLlrLimit;
      else if (l0 == ninf)
        l = -kLlrLimit;
      else
        l = l0 - l1;
      out[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(p)] = clamp_llr(l);
    }
  }
  return out;
}

}  // namespace

RVec llr_from_dd(std::span<const cd> y, std::span<const double> v, const Constellation& c, bool max_log, std::span<const double> prior) {
  return bit_llrs(y, v, c, max_log, prior, false);
}

RVec extrinsic_llr_from_dd(std::span<const cd> y, std::span<const double> v, const Constellation& c, bool max_log,
                           std::span<const double> prior) {
  return bit_llrs(y, v, c, max_log, prior, true);
}

RVec extrinsic(std::span<const double> l_out, std::span<const double> l_a) {
  if (l_out.size() != l_a.size()) throw Error("extrinsic: length mismatch");
  RVec e(l_out.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = l_out[i] - l_a[i];
  return e;
}

Interleaver::Interleaver(std::size_t n, std::uint64_t seed) : perm_(n) {
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  Rng rng(seed, 0x17e4);
  std::shuffle(perm_.begin(), perm_.end(), rng.engine());
}

SymbolPriors symbol_priors_from_llr(std::span<const double> llr, const Constellation& c) {
  const int q = c.order(), bps = c.bits_per_symbol();
  if (llr.size() % static_cast<std::size_t>(bps) != 0) throw Error("symbol_priors_from_llr: length not a multiple of bits per symbol");
  const std::size_t count = llr.size() / static_cast<std::size_t>(bps);
  SymbolPriors pr;
  pr.order = q;
  pr.probs.resize(count * static_cast<std::size_t>(q));
  for (std::size_t s = 0; s < count; ++s) {
    double total = 0.0;
    for (int a = 0; a < q; ++a) {
      double lp = 0.0;
      for (int p = 0; p < bps; ++p) {
        const double l = clamp_llr(llr[s * static_cast<std::size_t>(bps) + static_cast<std::size_t>(p)]);
        lp += c.bit(a, p) ? log_p1(l) : log_p0(l);
      }
      const double w = std::exp(lp);
      pr.probs[s * static_cast<std::size_t>(q) + static_cast<std::size_t>(a)] = w;
      total += w;
    }
    for (int a = 0; a < q; ++a) pr.probs[s * static_cast<std::size_t>(q) + static_cast<std::size_t>(a)] /= total;
  }
  return pr;
}

SoftSymbols soft_symbols_from_llr(std::span<const double> llr, const Constellation& c) {
  const SymbolPriors pr = symbol_priors_from_llr(llr, c);
  const std::size_t count = pr.probs.size() / static_cast<std::size_t>(pr.order);
  SoftSymbols out;
  out.mean.resize(count);
  out.var.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto p = pr.symbol(s);
    cd mean{};
    double e2 = 0.0;
    for (int a = 0; a < pr.order; ++a) {
      mean += p[static_cast<std::size_t>(a)] * c.point(a);
      e2 += p[static_cast<std::size_t>(a)] * std::norm(c.point(a));
    }
    out.mean[s] = mean;
    out.var[s] = std::max(0.0, e2 - std::norm(mean));
  }
  return out;
}

TurboLayout turbo_layout(const FrameGeometry& g, const Constellation& c, const LdpcCode& code) {
  TurboLayout l;
  l.frame_bits = g.data_symbols() * static_cast<std::size_t>(c.bits_per_symbol());
  l.code_length = code.length();
  l.info_per_codeword = code.info_length();
  l.codewords = static_cast<int>(l.frame_bits / static_cast<std::size_t>(code.length()));
  if (l.codewords < 1)
    throw ConfigError("frame carries " + std::to_string(l.frame_bits) + " data bits, fewer than one codeword of length " +
                      std::to_string(code.length()));
  return l;
}

Interleaver codeword_interleaver(int code_length, std::uint64_t seed, int index) {
  return Interleaver(static_cast<std::size_t>(code_length), seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(index));
}

TurboTransmission turbo_transmit(const FrameGeometry& g, const Constellation& c, const LdpcCode& code, std::uint64_t interleaver_seed,
                                 Rng& rng) {
  const TurboLayout lay = turbo_layout(g, c, code);
  TurboTransmission tx{DDFrame(g), {}, {}, {}};
  tx.frame_bits.reserve(lay.frame_bits);
  for (int k = 0; k < lay.codewords; ++k) {
    std::vector<std::uint8_t> info(static_cast<std::size_t>(lay.info_per_codeword));
    for (auto& b : info) b = static_cast<std::uint8_t>(rng.bit());
    const auto cw = code.encode(info);
    const auto il = codeword_interleaver(lay.code_length, interleaver_seed, k).interleave<std::uint8_t>(cw);
    tx.info_bits.insert(tx.info_bits.end(), info.begin(), info.end());
    tx.coded_bits.insert(tx.coded_bits.end(), cw.begin(), cw.end());
    tx.frame_bits.insert(tx.frame_bits.end(), il.begin(), il.end());
  }
  while (tx.frame_bits.size() < lay.frame_bits) tx.frame_bits.push_back(static_cast<std::uint8_t>(rng.bit()));
  tx.frame.fill_data(c.map(tx.frame_bits));
  return tx;
}

TurboResult turbo_receive(const TimeSignal& r, const BlockChannelSet& blocks, const Constellation& c, const LdpcCode& code,
                          const TurboConfig& cfg) {
  if (cfg.turbo_iterations < 1) throw ConfigError("turbo iterations must be >= 1");
  const FrameGeometry& g = blocks.geometry();
  TurboResult res;
  res.layout = turbo_layout(g, c, code);
  const TurboLayout& lay = res.layout;
  const std::size_t nc = static_cast<std::size_t>(lay.code_length);

  std::vector<Interleaver> ils;
  for (int k = 0; k < lay.codewords; ++k) ils.push_back(codeword_interleaver(lay.code_length, cfg.interleaver_seed, k));

  RVec l_a(lay.frame_bits, 0.0);
  for (int t = 0; t < cfg.turbo_iterations; ++t) {
    TurboIteration iter;
    SymbolPriors priors;
    if (t > 0) priors = symbol_priors_from_llr(l_a, c);
    const DetectionResult det = detect_frame(r, blocks, c, cfg.detector, t > 0 ? &priors : nullptr);
    iter.counter = det.counter;

    // DD observations in fill order.
    CVec y(g.data_symbols());
    RVec v(g.data_symbols());
    const int rows = g.data_rows();
    for (int k = 0; k < g.N; ++k)
      for (int m = 0; m < rows; ++m) {
        const std::size_t d = static_cast<std::size_t>(m) + static_cast<std::size_t>(rows) * static_cast<std::size_t>(k);
        y[d] = det.state.dd_obs[g.index(m, k)];
        v[d] = det.state.dd_obs_var[g.index(m, k)];
      }
    const std::span<const double> pr = t > 0 ? std::span<const double>(l_a) : std::span<const double>();
    const RVec l_out = llr_from_dd(y, v, c, cfg.max_log, pr);
    // Taken directly rather than as l_out - l_a: once the decoder is
    // confident both terms sit at the clamp and their difference is noise.
    const RVec l_e = extrinsic_llr_from_dd(y, v, c, cfg.max_log, pr);
    iter.detector_llr = l_out;
    iter.extrinsic_llr = l_e;
    iter.apriori_llr = l_a;

    RVec next(lay.frame_bits, 0.0);
    for (int k = 0; k < lay.codewords; ++k) {
      const std::span<const double> seg(l_e.data() + static_cast<std::size_t>(k) * nc, nc);
      const RVec in = ils[static_cast<std::size_t>(k)].deinterleave<double>(seg);
      for (double x : in) iter.raw_bits.push_back(x < 0.0 ? 1 : 0);
      const LdpcDecodeResult dec = code.decode(in, cfg.bp_iterations, cfg.min_sum);
      if (dec.converged) ++iter.converged_codewords;
      const auto info = code.extract_info(dec.bits);
      iter.info_bits.insert(iter.info_bits.end(), info.begin(), info.end());
      RVec fb = dec.llr;
      if (!cfg.intrinsic_feedback)
        for (std::size_t i = 0; i < nc; ++i) fb[i] = clamp_llr(dec.llr[i] - in[i]);
      const RVec il = ils[static_cast<std::size_t>(k)].interleave<double>(fb);
      std::copy(il.begin(), il.end(), next.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * nc));
    }
    iter.feedback_llr = next;
    l_a = std::move(next);
    res.iterations.push_back(std::move(iter));
  }
  return res;
}

}  // namespace otfs
