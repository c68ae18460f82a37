// Filter-recycling span and complexity bookkeeping.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace otfs {

/// How the recycling span is derived from the MSE tolerance.
enum class SpanRule {
  /// Largest rotation phi with 2 a Es (cos(theta) - cos(theta + phi)) <= delta_beta,
  /// i.e. phi = arccos(cos(theta) - delta_beta / (2 a Es)) - theta. The excess
  /// MSE of the recycled filter then stays within delta_beta.
  kMseBound,
  /// phi = arccos(delta_beta / (2 a)) - theta, the closed form as usually
  /// quoted. Decreases with delta_beta; kept for comparison.
  kClosedForm,
};

std::string to_string(SpanRule rule);
SpanRule parse_span_rule(const std::string& s);

struct SpanInputs {
  double delta_beta = 0.01;
  double nu_max = 0.0;  // largest Doppler tap
  double a = 1.0;       // |mu| of the last exact weights
  double theta = 0.0;   // arg(mu)
  int M = 0;
  int N = 0;
  double es = 1.0;
};

/// Admissible phase rotation phi (radians). Throws ConfigError outside the
/// arccos domain (delta_beta <= 0, or for kClosedForm delta_beta > 2a).
double admissible_rotation(const SpanInputs& in, SpanRule rule = SpanRule::kMseBound);

/// M N phi / (2 pi nu_max), unrounded. +inf when nu_max == 0.
double recycling_span_value(const SpanInputs& in, SpanRule rule = SpanRule::kMseBound);

/// floor(recycling_span_value) clamped to >= 1 (and to a finite cap when the
/// value is infinite).
int recycling_span(const SpanInputs& in, SpanRule rule = SpanRule::kMseBound, int cap = 1 << 30);

/// Number of samples within the channel coherence time, M N / (2 nu_max).
double coherence_symbols(int M, int N, double nu_max);

/// Order-of-magnitude operation counts per iteration.
struct ComplexityFormulas {
  double classical_mmse = 0.0;  // ((M - l_max) N)^3
  double message_passing = 0.0; // (M - l_max) N P |Q|
  double mrc = 0.0;             // (M - l_max) N P
  double sic_mmse = 0.0;        // (M - l_max) N l_max^3
  double approx_sic_mmse = 0.0; // sic_mmse / span
};

ComplexityFormulas complexity_formulas(int M, int N, int l_max, int paths, int order, double span);

}  // namespace otfs
