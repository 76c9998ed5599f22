#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "econokin/errors.hpp"
#include "econokin/rng.hpp"

namespace econokin::dist {

// Generalized-exponential density  amplitude * x^n * [1 + (q-1) beta_star x]^(-1/(q-1)).
// At q == 1 this is the plain gamma form  amplitude * x^n * exp(-beta_star x).
// Stored as (q, beta_star); evaluated through (b, r) = ((q-1) beta_star, 1/(q-1))
// to stay stable as q -> 1.
struct TsallisParams {
  double amplitude = 1.0;
  double q = 1.0;
  double beta_star = 1.0;
  double n = 0.0;

  bool is_exponential_family() const { return q == 1.0; }
  double shape_b() const { return (q - 1.0) * beta_star; }
  double shape_r() const { return 1.0 / (q - 1.0); }
  // Mean exists iff n + 2 < 1/(q-1) (always, at q == 1).
  bool finite_mean() const { return q == 1.0 || n + 2.0 < shape_r(); }
};

// One power-law-prefactor exponential term  coeff * x^exponent * exp(-x/beta).
struct GammaTerm {
  double coeff = 1.0;
  double exponent = 0.0;
};

// Sum of gamma terms sharing a single scale beta.
struct GammaMixParams {
  std::vector<GammaTerm> terms;
  double beta = 1.0;
};

// Two-component model: w_B * B(x) + w_T * T(x), components individually
// normalized to unit integral, w_B + w_T = 1.
struct MixtureModel {
  double w_B = 0.5;
  GammaMixParams B;
  double w_T = 0.5;
  TsallisParams T;
};

using DistSpec = std::variant<TsallisParams, GammaMixParams, MixtureModel>;

// Invariant checks; throw InvalidParamsError with a description.
void validate(const TsallisParams& p);
void validate(const GammaMixParams& p);
// check_component_mass additionally requires each component of the mixture
// to integrate to 1 (the type invariant); normalize() is the one caller
// that legitimately sees non-normalized components.
void validate(const MixtureModel& m, bool check_component_mass = true);
void validate(const DistSpec& spec, bool check_component_mass = true);

// Closed-form total integral over [0, inf).
double total_mass(const TsallisParams& p);
double total_mass(const GammaMixParams& p);
double total_mass(const DistSpec& spec);

// Density at x >= 0.
double eval_pdf(const DistSpec& spec, double x);

// Q(x) = integral of the density over [x, inf), by adaptive quadrature with
// an analytic tail remainder. Clamped to [0, 1]; requires a normalized spec.
double eval_ccdf(const DistSpec& spec, double x, double rel_tol = 1e-8);

// Q at many points, sharing segment integrals. xs need not be sorted.
std::vector<double> eval_ccdf_batch(const DistSpec& spec, const std::vector<double>& xs,
                                    double rel_tol = 1e-8);

// integral of t^k * pdf(t) over [x, inf) for k in {0, 1}. Works on raw
// (non-normalized) specs; mixture weights are applied.
double upper_moment(const DistSpec& spec, double x, int k, double rel_tol = 1e-8);

// Rescale amplitudes (only) so the total integral is 1 to 1e-8.
DistSpec normalize(const DistSpec& spec);

struct TailExponent {
  double pdf_slope;   // n + 1/(1-q)
  double ccdf_slope;  // pdf_slope + 1
};

// Asymptotic log-log slope of the power tail; q == 1 has none.
TailExponent tail_exponent(const TsallisParams& p);

// Closed-form mean; must agree with quadrature to 1e-6 relative.
double dist_mean(const DistSpec& spec);

// Inverse-CCDF sampler over a cached log-spaced grid with monotone
// interpolation. Built once per spec; immutable and thread-safe afterwards.
class Sampler {
 public:
  explicit Sampler(const DistSpec& spec);

  double operator()(Xoshiro256pp& rng) const { return invert(rng.next_double_open_low()); }

  // x such that ccdf(x) ~ u, u in (0, 1]; clamped to the cached range.
  double invert(double u) const;

  double x_min() const;
  double x_max() const;

 private:
  std::vector<double> log_x_;
  std::vector<double> log_q_;  // strictly decreasing
};

// Deterministic draw of `count` values; count < 0 is an error.
std::vector<double> sample(const DistSpec& spec, long long count, std::uint64_t seed);

// JSON round trip; documents carry an explicit "family" tag.
std::string to_json(const DistSpec& spec, int indent = 2);
DistSpec spec_from_json(const std::string& text);

}  // namespace econokin::dist
