#include "otfs/recycling.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "otfs/numeric.hpp"

namespace otfs {

std::string to_string(SpanRule rule) { return rule == SpanRule::kMseBound ? "mse-bound" : "closed-form"; }

SpanRule parse_span_rule(const std::string& s) {
  if (s == "mse-bound") return SpanRule::kMseBound;
  if (s == "closed-form") return SpanRule::kClosedForm;
  throw ConfigError("span rule must be 'mse-bound' or 'closed-form', got '" + s + "'");
}

double admissible_rotation(const SpanInputs& in, SpanRule rule) {
  if (!(in.delta_beta > 0.0)) throw ConfigError("delta_beta must be > 0");
  if (!(in.a > 0.0)) throw ConfigError("|mu| must be > 0");
  if (rule == SpanRule::kClosedForm) {
    const double x = in.delta_beta / (2.0 * in.a);
    if (x > 1.0) throw ConfigError("delta_beta exceeds 2|mu|; arccos argument out of domain");
    return std::acos(x) - in.theta;
  }
  const double x = std::cos(in.theta) - in.delta_beta / (2.0 * in.a * in.es);
  if (x < -1.0) throw ConfigError("delta_beta exceeds the largest possible excess MSE 2|mu|Es(1 + cos theta)");
  return std::acos(x) - in.theta;
}

double recycling_span_value(const SpanInputs& in, SpanRule rule) {
  const double phi = admissible_rotation(in, rule);
  if (in.nu_max == 0.0) return std::numeric_limits<double>::infinity();
  if (in.nu_max < 0.0) throw ConfigError("nu_max must be >= 0");
  return static_cast<double>(in.M) * in.N * phi / (2.0 * std::numbers::pi * in.nu_max);
}

int recycling_span(const SpanInputs& in, SpanRule rule, int cap) {
  const double v = recycling_span_value(in, rule);
  if (!std::isfinite(v) || v >= cap) return cap;
  return std::max(1, static_cast<int>(std::floor(v)));
}

double coherence_symbols(int M, int N, double nu_max) {
  if (!(nu_max > 0.0)) throw ConfigError("nu_max must be > 0");
  return static_cast<double>(M) * N / (2.0 * nu_max);
}

ComplexityFormulas complexity_formulas(int M, int N, int l_max, int paths, int order, double span) {
  const double layers = static_cast<double>(M - l_max) * N;
  ComplexityFormulas f;
  f.classical_mmse = layers * layers * layers;
  f.message_passing = layers * paths * order;
  f.mrc = layers * paths;
  f.sic_mmse = layers * std::pow(static_cast<double>(l_max), 3);
  f.approx_sic_mmse = f.sic_mmse / span;
  return f;
}

}  // namespace otfs
