// Command-line front end for the simulation harness.
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "otfs/harness.hpp"

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool full = false;
  std::string out;
  bool trace = false;
  bool timing = false;
  bool manifest = false;
  int paths = 9;
  double span = 100.0;
};

otfs::RunConfig resolve_config(const Options& o) {
  otfs::RunConfig cfg = o.config.empty() ? otfs::RunConfig::preset_named(o.full ? "full" : "desk") : otfs::RunConfig::load(o.config);
  if (o.full && !o.config.empty() && cfg.preset != "full")
    throw otfs::ConfigError("--full conflicts with a config whose preset is '" + cfg.preset + "'");
  if (o.seed_set) cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw otfs::ConfigError("--out: cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-padded OTFS link simulator with SIC-MMSE detection"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&o](const std::uint64_t& s) {
          o.seed = s;
          o.seed_set = true;
        },
        "Override the configured seed");
    sub->add_flag("--full", o.full, "Use the full-scale preset (M=512, N=128)");
    sub->add_option("--out", o.out, "CSV output path (default stdout)");
    sub->add_flag("--manifest", o.manifest, "Print the run manifest to stderr");
  };

  auto* ber = app.add_subcommand("ber", "BER versus SNR for the configured detectors");
  add_common(ber);
  ber->add_flag("--timing", o.timing, "Append wall-clock time per row (breaks byte-identical reruns)");
  auto* mse = app.add_subcommand("mse", "Per-iteration simulated MSE with state-evolution bounds");
  add_common(mse);
  auto* sinr = app.add_subcommand("sinr", "Per-layer SINR trace of one frame");
  add_common(sinr);
  sinr->add_flag("--trace", o.trace, "Accepted for symmetry; the sinr command always traces");
  auto* se = app.add_subcommand("se", "State-evolution trajectory only");
  add_common(se);
  auto* turbo = app.add_subcommand("turbo", "Coded BER per turbo iteration");
  add_common(turbo);
  auto* cx = app.add_subcommand("complexity", "Operation-count formulas and measured counters");
  add_common(cx);
  cx->add_option("--paths", o.paths, "Number of channel paths P in the formulas");
  cx->add_option("--span", o.span, "Recycling span for the approximate-detector formula");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const otfs::RunConfig cfg = resolve_config(o);
    Sink sink(o.out);
    std::ostream& os = sink.stream();
    std::string command;
    if (ber->parsed()) {
      command = "ber";
      otfs::write_ber_csv(os, otfs::run_ber(cfg), o.timing);
    } else if (mse->parsed()) {
      command = "mse";
      otfs::write_mse_csv(os, otfs::run_mse_trace(cfg));
    } else if (sinr->parsed()) {
      command = "sinr";
      otfs::write_sinr_csv(os, otfs::run_sinr_trace(cfg));
    } else if (se->parsed()) {
      command = "se";
      otfs::SeConfig s;
      s.ensemble = {cfg.geometry, cfg.channel.load(), cfg.channel.options(), cfg.se.realizations};
      s.order = cfg.order;
      s.snr_db = cfg.se.snr_db;
      s.iterations = cfg.detector.iterations;
      s.mc_samples = cfg.se.mc_samples;
      s.seed = cfg.seed;
      otfs::write_se_csv(os, otfs::se_run(s));
    } else if (turbo->parsed()) {
      command = "turbo";
      otfs::write_turbo_csv(os, otfs::run_turbo(cfg));
    } else if (cx->parsed()) {
      command = "complexity";
      otfs::write_complexity_csv(os, otfs::complexity_report(cfg, o.paths, o.span));
    }
    if (o.manifest) std::cerr << otfs::run_manifest(cfg, command) << '\n';
  } catch (const otfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
