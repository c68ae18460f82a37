#include "otfs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace otfs {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double DelayProfile::max_delay_ns() const {
  return delays_ns.empty() ? 0.0 : *std::max_element(delays_ns.begin(), delays_ns.end());
}

DelayProfile builtin_profile(const std::string& name) {
  if (name == "EVA" || name == "eva")
    return {"EVA", {0, 30, 150, 310, 370, 710, 1090, 1730, 2510}, {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9}};
  if (name == "EPA" || name == "epa") return {"EPA", {0, 30, 70, 90, 110, 190, 410}, {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8}};
  if (name == "ETU" || name == "etu")
    return {"ETU", {0, 50, 120, 200, 230, 500, 1600, 2300, 5000}, {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0}};
  if (name == "single") return {"single", {0.0}, {0.0}};
  throw ConfigError("unknown channel profile '" + name + "'");
}

DelayProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open channel profile '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    DelayProfile p;
    p.name = j.value("name", path);
    p.delays_ns = j.at("delays_ns").get<std::vector<double>>();
    p.powers_db = j.at("powers_db").get<std::vector<double>>();
    if (p.delays_ns.empty() || p.delays_ns.size() != p.powers_db.size())
      throw ConfigError("profile '" + path + "': delays_ns and powers_db must be non-empty and equally long");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("profile '" + path + "': " + e.what());
  }
}

double ChannelRealization::max_abs_doppler() const {
  double v = 0.0;
  for (const auto& p : paths) v = std::max(v, std::abs(p.doppler));
  return v;
}

double doppler_taps_bound(const FrameGeometry& g, double speed_kmh, double carrier_hz) {
  const double fd = speed_kmh / 3.6 * carrier_hz / kSpeedOfLight;
  return fd * g.N / g.delta_f;
}

std::vector<double> profile_delay_taps(const DelayProfile& p, const FrameGeometry& g, DelayScaling scaling) {
  std::vector<double> taps(p.delays_ns.size());
  const double max_ns = p.max_delay_ns();
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (scaling == DelayScaling::kFitLmax)
      taps[i] = max_ns > 0.0 ? p.delays_ns[i] / max_ns * g.l_max : 0.0;
    else
      taps[i] = p.delays_ns[i] * 1e-9 * g.M * g.delta_f;
  }
  return taps;
}

int required_lmax(const DelayProfile& p, const FrameGeometry& g) {
  const auto taps = profile_delay_taps(p, g, DelayScaling::kPhysical);
  return static_cast<int>(std::lround(*std::max_element(taps.begin(), taps.end())));
}

ChannelRealization generate_channel(const DelayProfile& profile, const ChannelOptions& opts, const FrameGeometry& g, Rng& rng) {
  g.validate();
  if (profile.delays_ns.empty() || profile.delays_ns.size() != profile.powers_db.size())
    throw ConfigError("channel profile '" + profile.name + "' is malformed");
  if (opts.speed_kmh < 0.0) throw ConfigError("channel.speed_kmh must be >= 0");

  ChannelRealization chan;
  chan.l_max = g.l_max;
  chan.k_max = opts.max_doppler_taps > 0.0 ? opts.max_doppler_taps : doppler_taps_bound(g, opts.speed_kmh, opts.carrier_hz);
  if (opts.speed_kmh == 0.0 && opts.max_doppler_taps <= 0.0) chan.k_max = 0.0;

  auto taps = profile_delay_taps(profile, g, opts.delay_scaling);
  double total = 0.0;
  std::vector<double> lin(profile.powers_db.size());
  for (std::size_t i = 0; i < lin.size(); ++i) total += lin[i] = std::pow(10.0, profile.powers_db[i] / 10.0);

  for (std::size_t i = 0; i < taps.size(); ++i) {
    double delay = opts.delay_grid == DelayGrid::kInteger ? std::round(taps[i]) : taps[i];
    if (delay > g.l_max + 1e-9) {
      std::ostringstream msg;
      msg << "profile '" << profile.name << "' delay " << profile.delays_ns[i] << " ns maps to " << delay << " taps, beyond l_max = " << g.l_max;
      throw ConfigError(msg.str());
    }
    ChannelPath path;
    path.delay = std::min(delay, static_cast<double>(g.l_max));
    path.gain = rng.complex_normal(lin[i] / total);
    path.doppler = chan.k_max > 0.0 ? rng.uniform(-chan.k_max, chan.k_max) : 0.0;
    chan.paths.push_back(path);
  }
  return chan;
}

cd delay_time_response(const ChannelRealization& chan, const FrameGeometry& g, int l, long t) {
  const double nm = static_cast<double>(g.size());
  cd acc{};
  for (const auto& p : chan.paths) {
    const double s = sinc(l - p.delay);
    if (s == 0.0) continue;
    const double phase = kTwoPi * p.doppler * (static_cast<double>(t) - p.delay) / nm;
    acc += p.gain * std::polar(1.0, phase) * s;
  }
  return acc;
}

// ---------------------------------------------------------------------------

BlockChannelSet::BlockChannelSet(const FrameGeometry& g, double noise_var)
    : geom_(g), noise_var_(noise_var), taps_(g.size() * static_cast<std::size_t>(g.l_max + 1)) {}

cd BlockChannelSet::entry(int n, int row, int col) const {
  const int l = row - col;
  if (l < 0 || l > geom_.l_max) return {};
  return tap(n, row, l);
}

CMatrix BlockChannelSet::block_matrix(int n) const {
  CMatrix H(static_cast<std::size_t>(geom_.M), static_cast<std::size_t>(geom_.M));
  for (int m = 0; m < geom_.M; ++m)
    for (int l = 0; l <= std::min(m, geom_.l_max); ++l) H(static_cast<std::size_t>(m), static_cast<std::size_t>(m - l)) = tap(n, m, l);
  return H;
}

void BlockChannelSet::apply_block(int n, std::span<const cd> x, std::span<cd> y) const {
  for (int m = 0; m < geom_.M; ++m) {
    cd acc{};
    for (int l = 0; l <= std::min(m, geom_.l_max); ++l) acc += tap(n, m, l) * x[static_cast<std::size_t>(m - l)];
    y[static_cast<std::size_t>(m)] = acc;
  }
}

bool BlockChannelSet::operator==(const BlockChannelSet& other) const {
  return geom_ == other.geom_ && noise_var_ == other.noise_var_ && taps_ == other.taps_;
}

BlockChannelSet build_block_channels(const ChannelRealization& chan, const FrameGeometry& g, double noise_var) {
  BlockChannelSet set(g, noise_var);
  set.set_nu_max(chan.max_abs_doppler());
  const double nm = static_cast<double>(g.size());
  for (const auto& p : chan.paths) {
    // alpha^kappa, the per-sample Doppler rotation of this path.
    const cd step = std::polar(1.0, kTwoPi * p.doppler / nm);
    for (int l = 0; l <= g.l_max; ++l) {
      const double s = sinc(l - p.delay);
      if (s == 0.0) continue;
      const cd weight = p.gain * s;
      for (int n = 0; n < g.N; ++n) {
        // alpha^{kappa (l - l_i)} * exp(j 2 pi kappa n / N) at row m = l.
        cd phasor = std::polar(1.0, kTwoPi * p.doppler * (static_cast<double>(n) / g.N + (l - p.delay) / nm));
        for (int m = l; m < g.M; ++m) {
          set.tap(n, m, l) += weight * phasor;
          phasor *= step;
        }
      }
    }
  }
  return set;
}

void extract_subchannel(const BlockChannelSet& blocks, int n, int m, SubChannel& out) {
  const auto& g = blocks.geometry();
  if (m < 0 || m > g.M - g.l_max - 1) throw Error("extract_subchannel: layer " + std::to_string(m) + " lies in the zero pad");
  if (n < 0 || n >= g.N) throw Error("extract_subchannel: block index out of range");
  const int lm = g.l_max;
  out.layer = m;
  out.target = std::min(m, lm);
  out.base = m - out.target;
  const int cols = out.target + lm + 1;
  if (out.H.rows() != static_cast<std::size_t>(lm + 1) || out.H.cols() != static_cast<std::size_t>(cols))
    out.H.resize(static_cast<std::size_t>(lm + 1), static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r <= lm; ++r) out.H(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = blocks.entry(n, m + r, out.base + c);
}

SubChannel extract_subchannel(const BlockChannelSet& blocks, int n, int m) {
  SubChannel s;
  extract_subchannel(blocks, n, m, s);
  return s;
}

TimeSignal apply_channel(const TimeSignal& signal, const BlockChannelSet& blocks, Rng& rng) {
  if (!(signal.geometry == blocks.geometry())) throw Error("apply_channel: geometry mismatch");
  const auto& g = signal.geometry;
  TimeSignal out{g, CVec(g.size())};
  for (int n = 0; n < g.N; ++n) {
    blocks.apply_block(n, signal.block(n), out.block(n));
    for (cd& y : out.block(n)) y += rng.complex_normal(blocks.noise_var());
  }
  return out;
}

ChannelRealization perturb_realization(const ChannelRealization& chan, const CsiErrorModel& model, Rng& rng) {
  if (model.sigma_h2 < 0.0 || model.sigma_k2 < 0.0) throw ConfigError("CSI error variances must be >= 0");
  ChannelRealization est = chan;
  if (model.sigma_h2 == 0.0 && model.sigma_k2 == 0.0) return est;
  // One coefficient error per distinct delay tap, applied to the first path at
  // that tap. For on-grid delays H_0(l, 0) = sum of the gains at tap l, so
  // this is exactly a CN(0, sigma_h2) error on each first-column entry.
  std::map<double, std::size_t> first_at_delay;
  for (std::size_t i = 0; i < est.paths.size(); ++i) first_at_delay.emplace(est.paths[i].delay, i);
  for (const auto& [delay, idx] : first_at_delay) est.paths[idx].gain += rng.complex_normal(model.sigma_h2);
  const double sk = std::sqrt(model.sigma_k2);
  for (auto& p : est.paths) p.doppler += sk * rng.normal();
  return est;
}

BlockChannelSet perturb_csi(const ChannelRealization& chan, const FrameGeometry& g, double noise_var, const CsiErrorModel& model, Rng& rng) {
  return build_block_channels(perturb_realization(chan, model, rng), g, noise_var);
}

void write_channel_csv(std::ostream& os, const ChannelRealization& chan) {
  os << "# otfs channel v1\n";
  os << "# l_max=" << chan.l_max << " k_max=" << std::setprecision(17) << chan.k_max << "\n";
  os << "# gain_re,gain_im,delay_taps,doppler_taps\n";
  os << std::setprecision(17);
  for (const auto& p : chan.paths) os << p.gain.real() << ',' << p.gain.imag() << ',' << p.delay << ',' << p.doppler << '\n';
}

ChannelRealization read_channel_csv(std::istream& is) {
  ChannelRealization chan;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto lp = line.find("l_max=");
      if (lp != std::string::npos) chan.l_max = std::stoi(line.substr(lp + 6));
      const auto kp = line.find("k_max=");
      if (kp != std::string::npos) chan.k_max = std::stod(line.substr(kp + 6));
      continue;
    }
    std::istringstream ls(line);
    double v[4];
    char comma;
    if (!(ls >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3])) throw Error("read_channel_csv: malformed line '" + line + "'");
    chan.paths.push_back({cd(v[0], v[1]), v[2], v[3]});
  }
  if (chan.paths.empty()) throw Error("read_channel_csv: no paths");
  return chan;
}

}  // namespace otfs
