// Python bindings for the simulation core. Results come back as lists of
// dicts so they drop straight into pandas or csv.DictWriter.
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "otfs/harness.hpp"
#include "otfs/recycling.hpp"

namespace py = pybind11;
using namespace otfs;

namespace {

using ComplexArray = py::array_t<cd, py::array::c_style | py::array::forcecast>;

DDFrame frame_from_array(const ComplexArray& grid, int l_max, double delta_f) {
  if (grid.ndim() != 2) throw ConfigError("grid must be a 2-D array of shape (M, N)");
  const FrameGeometry g{static_cast<int>(grid.shape(0)), static_cast<int>(grid.shape(1)), l_max, delta_f};
  g.validate();
  DDFrame f(g);
  auto a = grid.unchecked<2>();
  for (int n = 0; n < g.N; ++n)
    for (int m = 0; m < g.M; ++m) {
      if (g.is_pad_row(m)) {
        if (a(m, n) != cd{}) throw ConfigError("grid has a non-zero entry in the zero pad");
        continue;
      }
      f.set(m, n, a(m, n));
    }
  return f;
}

ComplexArray samples_to_array(const TimeSignal& s) {
  ComplexArray out({static_cast<py::ssize_t>(s.geometry.N), static_cast<py::ssize_t>(s.geometry.M)});
  std::copy(s.samples.begin(), s.samples.end(), out.mutable_data());
  return out;
}

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["snr_db"] = r.snr_db;
  d["detector"] = r.detector;
  d["ber"] = r.ber;
  d["bit_count"] = r.bit_count;
  d["error_count"] = r.error_count;
  d["frame_count"] = r.frame_count;
  d["multiply_count"] = r.multiply_count;
  d["ci_low"] = r.ci_low;
  d["ci_high"] = r.ci_high;
  return d;
}

RunConfig config_from(const py::object& cfg) {
  if (cfg.is_none()) return RunConfig::preset_named("desk");
  if (py::isinstance<py::str>(cfg)) {
    const std::string s = cfg.cast<std::string>();
    if (s == "desk" || s == "full") return RunConfig::preset_named(s);
    return RunConfig::from_json(s);
  }
  const py::module_ json = py::module_::import("json");
  return RunConfig::from_json(json.attr("dumps")(cfg).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zero-padded OTFS simulator core";
  // Translators are tried newest first, so the derived type goes last.
  py::register_exception<Error>(m, "OtfsError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "config_json",
      [](const py::object& cfg) {
        const RunConfig c = config_from(cfg);
        c.validate();
        return c.to_json();
      },
      py::arg("config") = py::none(), "Resolved configuration as a JSON string (preset name, JSON text or dict).");

  m.def(
      "idzt",
      [](const ComplexArray& grid, int l_max, double delta_f) { return samples_to_array(idzt_transmit(frame_from_array(grid, l_max, delta_f))); },
      py::arg("grid"), py::arg("l_max"), py::arg("delta_f") = 15e3, "Inverse Zak transform of an (M, N) grid; returns (N, M) time blocks.");
  m.def(
      "isfft_heisenberg",
      [](const ComplexArray& grid, int l_max, double delta_f) {
        return samples_to_array(isfft_heisenberg_transmit(frame_from_array(grid, l_max, delta_f)));
      },
      py::arg("grid"), py::arg("l_max"), py::arg("delta_f") = 15e3);

  m.def("coherence_symbols", &coherence_symbols, py::arg("M"), py::arg("N"), py::arg("nu_max"));
  m.def(
      "recycling_span",
      [](double delta_beta, double nu_max, double a, double theta, int M, int N, const std::string& rule) {
        return recycling_span_value({delta_beta, nu_max, a, theta, M, N, 1.0}, parse_span_rule(rule));
      },
      py::arg("delta_beta"), py::arg("nu_max"), py::arg("a") = 1.0, py::arg("theta") = 0.0, py::arg("M") = 512, py::arg("N") = 128,
      py::arg("rule") = "mse-bound", "Unrounded recycling span in symbols.");
  m.def(
      "complexity_formulas",
      [](int M, int N, int l_max, int paths, int order, double span) {
        const ComplexityFormulas f = complexity_formulas(M, N, l_max, paths, order, span);
        py::dict d;
        d["classical_mmse"] = f.classical_mmse;
        d["message_passing"] = f.message_passing;
        d["mrc"] = f.mrc;
        d["sic_mmse"] = f.sic_mmse;
        d["approx_sic_mmse"] = f.approx_sic_mmse;
        return d;
      },
      py::arg("M"), py::arg("N"), py::arg("l_max"), py::arg("paths"), py::arg("order"), py::arg("span"));

  m.def(
      "run_ber",
      [](const py::object& cfg) {
        const RunConfig c = config_from(cfg);
        std::vector<ResultRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_ber(c);
        }
        py::list out;
        for (const auto& r : rows) out.append(row_dict(r));
        return out;
      },
      py::arg("config") = py::none());

  m.def(
      "run_sinr_trace",
      [](const py::object& cfg) {
        const RunConfig c = config_from(cfg);
        py::list out;
        for (const auto& r : run_sinr_trace(c)) {
          py::dict d;
          d["iteration"] = r.iteration;
          d["layer"] = r.layer;
          d["block"] = r.block;
          d["mu"] = r.mu;
          d["sinr_db"] = r.sinr_db;
          d["sinr_exact_db"] = r.sinr_exact_db;
          d["recomputed"] = r.recomputed;
          out.append(d);
        }
        return out;
      },
      py::arg("config") = py::none());

  m.def(
      "run_mse_trace",
      [](const py::object& cfg) {
        const RunConfig c = config_from(cfg);
        py::list out;
        for (const auto& r : run_mse_trace(c)) {
          py::dict d;
          d["iteration"] = r.iteration;
          d["mse_sim"] = r.mse_sim;
          d["mse_stderr"] = r.mse_stderr;
          d["tau2_low"] = r.tau2_low;
          d["tau2_up"] = r.tau2_up;
          d["nu2"] = r.nu2;
          d["snr_eff_db"] = r.snr_eff_db;
          out.append(d);
        }
        return out;
      },
      py::arg("config") = py::none());

  m.def(
      "run_turbo",
      [](const py::object& cfg) {
        const RunConfig c = config_from(cfg);
        py::list out;
        for (const auto& r : run_turbo(c)) {
          py::dict d;
          d["snr_db"] = r.snr_db;
          d["iteration"] = r.iteration;
          d["coded_ber"] = r.coded_ber;
          d["uncoded_ber"] = r.uncoded_ber;
          d["info_bits"] = r.info_bits;
          d["info_errors"] = r.info_errors;
          d["frames"] = r.frames;
          out.append(d);
        }
        return out;
      },
      py::arg("config") = py::none());
}
