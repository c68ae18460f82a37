#include "otfs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace otfs {

using nlohmann::json;

namespace {

const char* scaling_name(DelayScaling s) { return s == DelayScaling::kPhysical ? "physical" : "fit_lmax"; }

DelayScaling parse_scaling(const std::string& s, const std::string& field) {
  if (s == "physical") return DelayScaling::kPhysical;
  if (s == "fit_lmax") return DelayScaling::kFitLmax;
  throw ConfigError(field + ": expected 'physical' or 'fit_lmax', got '" + s + "'");
}

// Reads the keys of one JSON object and rejects anything it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) out = static_cast<int>(integer(*v, key));
  }
  void read(const std::string& key, long& out) {
    if (const json* v = find(key)) out = integer(*v, key);
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      const long x = integer(*v, key);
      if (x < 0) throw ConfigError(field(key) + ": must be >= 0");
      out = static_cast<std::uint64_t>(x);
    }
  }
  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(field(key) + ": expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  void read(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key) + ": expected an array of strings");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_string()) throw ConfigError(field(key) + ": expected an array of strings");
        out.push_back(x.get<std::string>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
  }

 private:
  long integer(const json& v, const std::string& key) const {
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e18) return static_cast<long>(d);
    }
    throw ConfigError(field(key) + ": expected an integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Rng frame_rng(const RunConfig& cfg, std::uint64_t frame_index) { return Rng(cfg.seed, 0xF7A3E).fork(frame_index); }

// Sends `frame` through a fresh channel for frame `frame_index`.
void propagate(const RunConfig& cfg, const DelayProfile& profile, double noise_var, std::uint64_t frame_index, FrameSample& s) {
  Rng root = frame_rng(cfg, frame_index);
  Rng chan_rng = root.fork(1), noise_rng = root.fork(3), csi_rng = root.fork(4);
  const FrameGeometry& g = cfg.geometry;
  s.channel = generate_channel(profile, cfg.channel.options(), g, chan_rng);
  s.truth = build_block_channels(s.channel, g, noise_var);
  s.tx = idzt_transmit(s.frame);
  s.rx = apply_channel(s.tx, s.truth, noise_rng);
  if (cfg.csi.sigma_h2 > 0.0 || cfg.csi.sigma_k2 > 0.0)
    s.receiver = perturb_csi(s.channel, g, noise_var, cfg.csi, csi_rng);
  else
    s.receiver = s.truth;
}

long count_bit_errors(const std::vector<int>& labels, const std::vector<std::uint8_t>& bits, const Constellation& c) {
  const int bps = c.bits_per_symbol();
  long e = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    for (int p = 0; p < bps; ++p) e += c.bit(labels[k], p) != bits[k * static_cast<std::size_t>(bps) + static_cast<std::size_t>(p)];
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ChannelOptions ChannelConfig::options() const {
  ChannelOptions o;
  o.speed_kmh = speed_kmh;
  o.carrier_hz = carrier_hz;
  o.delay_grid = fractional_delays ? DelayGrid::kFractional : DelayGrid::kInteger;
  o.delay_scaling = delay_scaling;
  o.max_doppler_taps = max_doppler_taps;
  return o;
}

DelayProfile ChannelConfig::load() const {
  if (profile.find('/') != std::string::npos || profile.ends_with(".json")) {
    if (std::filesystem::exists(profile)) return load_profile(profile);
    const std::string bundled = std::string(OTFS_DATA_DIR) + "/profiles/" + profile;
    if (std::filesystem::exists(bundled)) return load_profile(bundled);
    throw ConfigError("channel.profile: file '" + profile + "' not found");
  }
  return builtin_profile(profile);
}

void RunConfig::validate() const {
  try {
    geometry.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  if (order != 4 && order != 16) throw ConfigError("modulation: order must be 4 or 16");
  if (channel.speed_kmh < 0.0) throw ConfigError("channel.speed_kmh: must be >= 0");
  if (!(channel.carrier_hz > 0.0)) throw ConfigError("channel.carrier_hz: must be > 0");
  if (channel.max_doppler_taps < 0.0) throw ConfigError("channel.max_doppler_taps: must be >= 0");
  try {
    detector.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("detector: ") + e.what());
  }
  if (ber.snr_db.empty()) throw ConfigError("ber.snr_db: SNR grid must not be empty");
  for (const auto& d : ber.detectors)
    if (d != "mrc") try {
        parse_detector_mode(d);
      } catch (const ConfigError&) {
        throw ConfigError("ber.detectors: unknown detector '" + d + "' (expected hard, soft, approx or mrc)");
      }
  if (ber.detectors.empty()) throw ConfigError("ber.detectors: list must not be empty");
  if (ber.min_errors < 100) throw ConfigError("ber.min_errors: must be >= 100");
  if (ber.min_bits < 0) throw ConfigError("ber.min_bits: must be >= 0");
  if (ber.max_frames < 1) throw ConfigError("ber.max_frames: must be >= 1");
  if (turbo.iterations < 1) throw ConfigError("turbo.iterations: must be >= 1");
  if (turbo.bp_iterations < 1) throw ConfigError("turbo.bp_iterations: must be >= 1");
  if (turbo.frames < 1) throw ConfigError("turbo.frames: must be >= 1");
  if (csi.sigma_h2 < 0.0) throw ConfigError("csi.sigma_h2: must be >= 0");
  if (csi.sigma_k2 < 0.0) throw ConfigError("csi.sigma_k2: must be >= 0");
  if (se.realizations < 1) throw ConfigError("se.realizations: must be >= 1");
  if (se.mc_samples < 1000) throw ConfigError("se.mc_samples: must be >= 1000");
  if (se.frames < 2) throw ConfigError("se.frames: must be >= 2");
}

RunConfig RunConfig::preset_named(const std::string& name) {
  RunConfig cfg;
  if (name == "desk") return cfg;
  if (name == "full") {
    cfg.preset = "full";
    cfg.geometry = {512, 128, 19, 15e3};
    cfg.channel.delay_scaling = DelayScaling::kPhysical;
    cfg.channel.max_doppler_taps = 0.0;
    cfg.detector.fixed_span = 0;
    cfg.ber.snr_db = {6.0, 8.0, 10.0, 12.0, 14.0, 16.0};
    cfg.turbo.frames = 20;
    return cfg;
  }
  throw ConfigError("preset: unknown preset '" + name + "' (expected desk or full)");
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ObjectReader top(j, "");
  std::string preset = "desk";
  top.read("preset", preset);
  RunConfig cfg = preset_named(preset);
  top.read("seed", cfg.seed);
  top.read("modulation", cfg.order);
  if (const json* g = top.find("geometry")) {
    ObjectReader r(*g, "geometry");
    r.read("M", cfg.geometry.M);
    r.read("N", cfg.geometry.N);
    r.read("l_max", cfg.geometry.l_max);
    r.read("delta_f", cfg.geometry.delta_f);
    r.finish();
  }
  if (const json* ch = top.find("channel")) {
    ObjectReader r(*ch, "channel");
    r.read("profile", cfg.channel.profile);
    r.read("speed_kmh", cfg.channel.speed_kmh);
    r.read("carrier_hz", cfg.channel.carrier_hz);
    r.read("fractional_delays", cfg.channel.fractional_delays);
    std::string scaling = scaling_name(cfg.channel.delay_scaling);
    r.read("delay_scaling", scaling);
    cfg.channel.delay_scaling = parse_scaling(scaling, "channel.delay_scaling");
    r.read("max_doppler_taps", cfg.channel.max_doppler_taps);
    r.finish();
  }
  if (const json* d = top.find("detector")) {
    ObjectReader r(*d, "detector");
    std::string mode = to_string(cfg.detector.mode), rule = to_string(cfg.detector.span_rule);
    r.read("mode", mode);
    r.read("iterations", cfg.detector.iterations);
    r.read("delta_beta", cfg.detector.delta_beta);
    r.read("fixed_span", cfg.detector.fixed_span);
    r.read("span_rule", rule);
    r.finish();
    try {
      cfg.detector.mode = parse_detector_mode(mode);
      cfg.detector.span_rule = parse_span_rule(rule);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("detector: ") + e.what());
    }
  }
  if (const json* b = top.find("ber")) {
    ObjectReader r(*b, "ber");
    r.read("detectors", cfg.ber.detectors);
    r.read("snr_db", cfg.ber.snr_db);
    r.read("min_errors", cfg.ber.min_errors);
    r.read("min_bits", cfg.ber.min_bits);
    r.read("max_frames", cfg.ber.max_frames);
    r.finish();
  }
  if (const json* t = top.find("turbo")) {
    ObjectReader r(*t, "turbo");
    r.read("code", cfg.turbo.code);
    r.read("iterations", cfg.turbo.iterations);
    r.read("bp_iterations", cfg.turbo.bp_iterations);
    r.read("intrinsic_feedback", cfg.turbo.intrinsic_feedback);
    r.read("min_sum", cfg.turbo.min_sum);
    r.read("max_log", cfg.turbo.max_log);
    r.read("interleaver_seed", cfg.turbo.interleaver_seed);
    r.read("frames", cfg.turbo.frames);
    r.finish();
  }
  if (const json* c = top.find("csi")) {
    ObjectReader r(*c, "csi");
    r.read("sigma_h2", cfg.csi.sigma_h2);
    r.read("sigma_k2", cfg.csi.sigma_k2);
    r.finish();
  }
  if (const json* s = top.find("se")) {
    ObjectReader r(*s, "se");
    r.read("snr_db", cfg.se.snr_db);
    r.read("realizations", cfg.se.realizations);
    r.read("mc_samples", cfg.se.mc_samples);
    r.read("frames", cfg.se.frames);
    r.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["preset"] = preset;
  j["seed"] = seed;
  j["modulation"] = order;
  j["geometry"] = {{"M", geometry.M}, {"N", geometry.N}, {"l_max", geometry.l_max}, {"delta_f", geometry.delta_f}};
  j["channel"] = {{"profile", channel.profile},
                  {"speed_kmh", channel.speed_kmh},
                  {"carrier_hz", channel.carrier_hz},
                  {"fractional_delays", channel.fractional_delays},
                  {"delay_scaling", scaling_name(channel.delay_scaling)},
                  {"max_doppler_taps", channel.max_doppler_taps}};
  j["detector"] = {{"mode", to_string(detector.mode)},
                   {"iterations", detector.iterations},
                   {"delta_beta", detector.delta_beta},
                   {"fixed_span", detector.fixed_span},
                   {"span_rule", to_string(detector.span_rule)}};
  j["ber"] = {{"detectors", ber.detectors},
              {"snr_db", ber.snr_db},
              {"min_errors", ber.min_errors},
              {"min_bits", ber.min_bits},
              {"max_frames", ber.max_frames}};
  j["turbo"] = {{"code", turbo.code},
                {"iterations", turbo.iterations},
                {"bp_iterations", turbo.bp_iterations},
                {"intrinsic_feedback", turbo.intrinsic_feedback},
                {"min_sum", turbo.min_sum},
                {"max_log", turbo.max_log},
                {"interleaver_seed", turbo.interleaver_seed},
                {"frames", turbo.frames}};
  j["csi"] = {{"sigma_h2", csi.sigma_h2}, {"sigma_k2", csi.sigma_k2}};
  j["se"] = {{"snr_db", se.snr_db}, {"realizations", se.realizations}, {"mc_samples", se.mc_samples}, {"frames", se.frames}};
  return j.dump(2);
}

double noise_var_for_snr(double snr_db, double es) { return es / std::pow(10.0, snr_db / 10.0); }

// ---------------------------------------------------------------------------
// Frames and detectors

FrameSample simulate_frame(const RunConfig& cfg, const Constellation& c, const DelayProfile& profile, double noise_var,
                           std::uint64_t frame_index) {
  FrameSample s;
  Rng bits_rng = frame_rng(cfg, frame_index).fork(2);
  const std::size_t nbits = cfg.geometry.data_symbols() * static_cast<std::size_t>(c.bits_per_symbol());
  s.bits.resize(nbits);
  for (auto& b : s.bits) b = static_cast<std::uint8_t>(bits_rng.bit());
  s.frame = DDFrame(cfg.geometry);
  s.frame.fill_data(c.map(s.bits));
  propagate(cfg, profile, noise_var, frame_index, s);
  return s;
}

NamedDetection run_named_detector(const std::string& name, const FrameSample& s, const Constellation& c, const DetectorConfig& cfg) {
  if (name == "mrc") {
    MrcResult r = mrc_detect(s.rx, s.receiver, c, cfg.iterations);
    return {std::move(r.labels), r.counter};
  }
  DetectorConfig d = cfg;
  d.mode = parse_detector_mode(name);
  d.trace = false;
  d.record_iterations = false;
  DetectionResult r = detect_frame(s.rx, s.receiver, c, d);
  return {std::move(r.labels), r.counter};
}

std::pair<double, double> binomial_ci95(long errors, long bits) {
  if (bits <= 0) return {0.0, 1.0};
  if (errors <= 0) errors = 0;
  const double z = 1.959963984540054;
  const double n = static_cast<double>(bits), p = static_cast<double>(errors) / n;
  const double den = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / den;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / den;
  return {errors == 0 ? 0.0 : std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<ResultRow> run_ber(const RunConfig& cfg) {
  cfg.validate();
  const Constellation c(cfg.order);
  const DelayProfile profile = cfg.channel.load();
  std::vector<ResultRow> out;
  for (double snr : cfg.ber.snr_db) {
    const double noise = noise_var_for_snr(snr, c.es());
    std::vector<ResultRow> rows(cfg.ber.detectors.size());
    for (std::size_t d = 0; d < rows.size(); ++d) {
      rows[d].snr_db = snr;
      rows[d].detector = cfg.ber.detectors[d];
    }
    for (long f = 0; f < cfg.ber.max_frames; ++f) {
      const FrameSample s = simulate_frame(cfg, c, profile, noise, static_cast<std::uint64_t>(f));
      bool done = true;
      for (std::size_t d = 0; d < rows.size(); ++d) {
        const auto t0 = std::chrono::steady_clock::now();
        const NamedDetection det = run_named_detector(rows[d].detector, s, c, cfg.detector);
        rows[d].wall_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows[d].error_count += count_bit_errors(det.labels, s.bits, c);
        rows[d].bit_count += static_cast<long>(s.bits.size());
        rows[d].multiply_count += det.counter.complex_mults;
        ++rows[d].frame_count;
        done = done && rows[d].error_count >= cfg.ber.min_errors && rows[d].bit_count >= cfg.ber.min_bits;
      }
      if (done) break;
    }
    for (auto& r : rows) {
      r.ber = static_cast<double>(r.error_count) / static_cast<double>(r.bit_count);
      std::tie(r.ci_low, r.ci_high) = binomial_ci95(r.error_count, r.bit_count);
      out.push_back(r);
    }
  }
  return out;
}

void write_ber_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool timing) {
  os << "snr_db,detector,ber,bit_count,error_count,frame_count,multiply_count,ci_low,ci_high";
  if (timing) os << ",wall_time_s";
  os << '\n' << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.snr_db << ',' << r.detector << ',' << r.ber << ',' << r.bit_count << ',' << r.error_count << ',' << r.frame_count << ','
       << r.multiply_count << ',' << r.ci_low << ',' << r.ci_high;
    if (timing) os << ',' << r.wall_time_s;
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// MSE / SINR traces

std::vector<MseTraceRow> run_mse_trace(const RunConfig& cfg) {
  cfg.validate();
  const Constellation c(cfg.order);
  const DelayProfile profile = cfg.channel.load();
  const double noise = noise_var_for_snr(cfg.se.snr_db, c.es());
  const int iters = cfg.detector.iterations;
  const FrameGeometry& g = cfg.geometry;

  DetectorConfig det = cfg.detector;
  det.record_iterations = true;
  det.trace = false;
  std::vector<double> sum(static_cast<std::size_t>(iters), 0.0), sum2(static_cast<std::size_t>(iters), 0.0);
  for (long f = 0; f < cfg.se.frames; ++f) {
    const FrameSample s = simulate_frame(cfg, c, profile, noise, static_cast<std::uint64_t>(f));
    const DetectionResult r = detect_frame(s.rx, s.receiver, c, det);
    for (int it = 0; it < iters; ++it) {
      const CVec& est = r.linear_estimates[static_cast<std::size_t>(it)];
      double e = 0.0;
      for (int n = 0; n < g.N; ++n)
        for (int m = 0; m < g.data_rows(); ++m) e += std::norm(est[g.index(m, n)] - s.tx.samples[g.index(m, n)]);
      e /= static_cast<double>(g.data_symbols());
      sum[static_cast<std::size_t>(it)] += e;
      sum2[static_cast<std::size_t>(it)] += e * e;
    }
  }

  SeConfig se;
  se.ensemble = {g, profile, cfg.channel.options(), cfg.se.realizations};
  se.order = cfg.order;
  se.snr_db = cfg.se.snr_db;
  se.iterations = iters;
  se.mc_samples = cfg.se.mc_samples;
  se.seed = cfg.seed;
  const auto bounds = se_run(se);

  std::vector<MseTraceRow> rows;
  rows.push_back({0, c.es(), 0.0, c.es(), c.es(), c.es(), 0.0});
  const double F = static_cast<double>(cfg.se.frames);
  for (int it = 0; it < iters; ++it) {
    MseTraceRow row;
    row.iteration = it + 1;
    row.mse_sim = sum[static_cast<std::size_t>(it)] / F;
    const double var = std::max(0.0, (sum2[static_cast<std::size_t>(it)] / F - row.mse_sim * row.mse_sim) * F / (F - 1.0));
    row.mse_stderr = std::sqrt(var / F);
    const SeRow& b = bounds[static_cast<std::size_t>(it)];
    row.tau2_low = b.tau2_low;
    row.tau2_up = b.tau2_up;
    row.nu2 = b.nu2_low;
    row.snr_eff_db = b.snr_eff_db;
    rows.push_back(row);
  }
  return rows;
}

void write_mse_csv(std::ostream& os, const std::vector<MseTraceRow>& rows) {
  os << "iteration,mse_sim,mse_stderr,tau2_low,tau2_up,nu2,snr_eff_db\n" << std::setprecision(10);
  for (const auto& r : rows)
    os << r.iteration << ',' << r.mse_sim << ',' << r.mse_stderr << ',' << r.tau2_low << ',' << r.tau2_up << ',' << r.nu2 << ','
       << r.snr_eff_db << '\n';
}

std::vector<TraceRow> run_sinr_trace(const RunConfig& cfg) {
  cfg.validate();
  const Constellation c(cfg.order);
  const DelayProfile profile = cfg.channel.load();
  const FrameSample s = simulate_frame(cfg, c, profile, noise_var_for_snr(cfg.ber.snr_db.front(), c.es()), 0);
  DetectorConfig det = cfg.detector;
  det.trace = true;
  return detect_frame(s.rx, s.receiver, c, det).trace;
}

void write_sinr_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "iteration,layer,block,mu_re,mu_im,sigma2_post,sinr_db,sinr_exact_db,recomputed\n" << std::setprecision(12);
  for (const auto& r : rows)
    os << r.iteration << ',' << r.layer << ',' << r.block << ',' << r.mu.real() << ',' << r.mu.imag() << ',' << r.sigma2_post << ','
       << r.sinr_db << ',' << r.sinr_exact_db << ',' << (r.recomputed ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------
// Turbo

LdpcCode load_code(const TurboRunConfig& cfg) {
  if (cfg.code == "bundled") return LdpcCode::bundled();
  return LdpcCode::load_alist(cfg.code);
}

std::vector<TurboRow> run_turbo(const RunConfig& cfg) {
  cfg.validate();
  const Constellation c(cfg.order);
  const DelayProfile profile = cfg.channel.load();
  const LdpcCode code = load_code(cfg.turbo);
  TurboConfig tc;
  tc.turbo_iterations = cfg.turbo.iterations;
  tc.detector = cfg.detector;
  tc.bp_iterations = cfg.turbo.bp_iterations;
  tc.min_sum = cfg.turbo.min_sum;
  tc.max_log = cfg.turbo.max_log;
  tc.intrinsic_feedback = cfg.turbo.intrinsic_feedback;
  tc.interleaver_seed = cfg.turbo.interleaver_seed;

  std::vector<TurboRow> out;
  for (double snr : cfg.ber.snr_db) {
    const double noise = noise_var_for_snr(snr, c.es());
    std::vector<TurboRow> rows(static_cast<std::size_t>(tc.turbo_iterations));
    for (long f = 0; f < cfg.turbo.frames; ++f) {
      FrameSample s;
      Rng bits_rng = frame_rng(cfg, static_cast<std::uint64_t>(f)).fork(2);
      TurboTransmission tx = turbo_transmit(cfg.geometry, c, code, tc.interleaver_seed, bits_rng);
      s.frame = tx.frame;
      propagate(cfg, profile, noise, static_cast<std::uint64_t>(f), s);
      const TurboResult r = turbo_receive(s.rx, s.receiver, c, code, tc);
      for (std::size_t t = 0; t < r.iterations.size(); ++t) {
        const TurboIteration& it = r.iterations[t];
        TurboRow& row = rows[t];
        for (std::size_t i = 0; i < tx.info_bits.size(); ++i) row.info_errors += it.info_bits[i] != tx.info_bits[i];
        for (std::size_t i = 0; i < tx.coded_bits.size(); ++i) row.coded_errors += it.raw_bits[i] != tx.coded_bits[i];
        row.info_bits += static_cast<long>(tx.info_bits.size());
        row.coded_bits += static_cast<long>(tx.coded_bits.size());
        ++row.frames;
      }
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      rows[t].snr_db = snr;
      rows[t].iteration = static_cast<int>(t) + 1;
      rows[t].coded_ber = static_cast<double>(rows[t].info_errors) / static_cast<double>(rows[t].info_bits);
      rows[t].uncoded_ber = static_cast<double>(rows[t].coded_errors) / static_cast<double>(rows[t].coded_bits);
      out.push_back(rows[t]);
    }
  }
  return out;
}

void write_turbo_csv(std::ostream& os, const std::vector<TurboRow>& rows) {
  os << "snr_db,turbo_iteration,coded_ber,uncoded_ber,info_bits,info_errors,coded_bits,coded_errors,frames\n" << std::setprecision(10);
  for (const auto& r : rows)
    os << r.snr_db << ',' << r.iteration << ',' << r.coded_ber << ',' << r.uncoded_ber << ',' << r.info_bits << ',' << r.info_errors << ','
       << r.coded_bits << ',' << r.coded_errors << ',' << r.frames << '\n';
}

// ---------------------------------------------------------------------------
// Complexity and reproducibility

std::vector<ComplexityRow> complexity_report(const RunConfig& cfg, int paths, double span) {
  cfg.validate();
  const FrameGeometry& g = cfg.geometry;
  const ComplexityFormulas f = complexity_formulas(g.M, g.N, g.l_max, paths, cfg.order, span);
  std::vector<ComplexityRow> rows{{"formula_classical_mmse", f.classical_mmse},
                                  {"formula_message_passing", f.message_passing},
                                  {"formula_mrc", f.mrc},
                                  {"formula_sic_mmse", f.sic_mmse},
                                  {"formula_approx_sic_mmse", f.approx_sic_mmse}};

  const Constellation c(cfg.order);
  const FrameSample s = simulate_frame(cfg, c, cfg.channel.load(), noise_var_for_snr(cfg.ber.snr_db.front(), c.es()), 0);
  DetectorConfig exact = cfg.detector;
  exact.mode = DetectorMode::kSoft;
  DetectorConfig approx = cfg.detector;
  approx.mode = DetectorMode::kApprox;
  if (approx.fixed_span <= 0 && span >= 1.0) approx.fixed_span = static_cast<int>(span);
  const double iters = cfg.detector.iterations;
  const NamedDetection e = run_named_detector("soft", s, c, exact);
  const NamedDetection a = run_named_detector("approx", s, c, approx);
  const NamedDetection m = run_named_detector("mrc", s, c, exact);
  rows.push_back({"measured_exact_weight_computations_per_iteration", static_cast<double>(e.counter.weight_computations) / iters});
  rows.push_back({"measured_approx_weight_computations_per_iteration", static_cast<double>(a.counter.weight_computations) / iters});
  rows.push_back({"measured_exact_to_approx_ratio",
                  static_cast<double>(e.counter.weight_computations) / static_cast<double>(std::max<std::uint64_t>(1, a.counter.weight_computations))});
  rows.push_back({"measured_exact_mults_per_iteration", static_cast<double>(e.counter.complex_mults) / iters});
  rows.push_back({"measured_approx_mults_per_iteration", static_cast<double>(a.counter.complex_mults) / iters});
  rows.push_back({"measured_mrc_branch_mults_per_iteration", static_cast<double>(m.counter.complex_mults) / iters});
  return rows;
}

void write_complexity_csv(std::ostream& os, const std::vector<ComplexityRow>& rows) {
  os << "quantity,value\n" << std::setprecision(10);
  for (const auto& r : rows) os << r.quantity << ',' << r.value << '\n';
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string run_manifest(const RunConfig& cfg, const std::string& command) {
  Rng chan_rng = frame_rng(cfg, 0).fork(1);
  const ChannelRealization chan = generate_channel(cfg.channel.load(), cfg.channel.options(), cfg.geometry, chan_rng);
  std::ostringstream dump;
  write_channel_csv(dump, chan);
  json j;
  j["command"] = command;
  j["seed"] = cfg.seed;
  j["config"] = json::parse(cfg.to_json());
  j["first_channel_hash"] = content_hash(dump.str());
  j["version"] = "0.1.0";
  return j.dump(2);
}

}  // namespace otfs
