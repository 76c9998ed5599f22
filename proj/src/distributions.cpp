#include "econokin/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "econokin/quadrature.hpp"

#include "json.hpp"

namespace econokin::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lbeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

// log of x^p * exp(-x/beta) at x > 0.
double log_gamma_weight(double p, double beta, double x) {
  return p * std::log(x) - x / beta;
}

// log of x^p * (1 + b x)^(-r) at x > 0.
double log_tsallis_weight(double p, double b, double r, double x) {
  return p * std::log(x) - r * std::log1p(b * x);
}

double gamma_term_pdf(const GammaTerm& t, double beta, double x) {
  if (x == 0.0) {
    if (t.exponent > 0.0) return 0.0;
    if (t.exponent == 0.0) return t.coeff;
    return kInf;
  }
  return t.coeff * std::exp(log_gamma_weight(t.exponent, beta, x));
}

double tsallis_pdf(const TsallisParams& p, double x) {
  if (x == 0.0) {
    if (p.n > 0.0) return 0.0;
    if (p.n == 0.0) return p.amplitude;
    return kInf;
  }
  double lw;
  if (p.is_exponential_family()) {
    lw = log_gamma_weight(p.n, 1.0 / p.beta_star, x);
  } else {
    lw = log_tsallis_weight(p.n, p.shape_b(), p.shape_r(), x);
  }
  return p.amplitude * std::exp(lw);
}

double mixture_pdf(const MixtureModel& m, double x);

double spec_pdf(const DistSpec& spec, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TsallisParams>) {
          return tsallis_pdf(p, x);
        } else if constexpr (std::is_same_v<T, GammaMixParams>) {
          double v = 0.0;
          for (const auto& t : p.terms) v += gamma_term_pdf(t, p.beta, x);
          return v;
        } else {
          return mixture_pdf(p, x);
        }
      },
      spec);
}

double mixture_pdf(const MixtureModel& m, double x) {
  double v = 0.0;
  for (const auto& t : m.B.terms) v += m.w_B * gamma_term_pdf(t, m.B.beta, x);
  v += m.w_T * tsallis_pdf(m.T, x);
  return v;
}

// ---- closed-form masses and first moments ------------------------------

// integral over [0, inf) of x^(a+k) exp(-x/beta).
double gamma_term_moment(double coeff, double a, double beta, int k) {
  return coeff * std::exp(std::lgamma(a + k + 1.0) + (a + k + 1.0) * std::log(beta));
}

// integral over [0, inf) of amplitude x^(n+k) (1+bx)^(-r); requires r > n+k+1.
double tsallis_moment(const TsallisParams& p, int k) {
  if (p.is_exponential_family())
    return gamma_term_moment(p.amplitude, p.n, 1.0 / p.beta_star, k);
  const double r = p.shape_r();
  const double b = p.shape_b();
  return p.amplitude *
         std::exp(-(p.n + k + 1.0) * std::log(b) + lbeta(p.n + k + 1.0, r - p.n - k - 1.0));
}

// ---- upper moments: quadrature plus analytic tail ----------------------

// Remainder of integral over [X, inf) of A x^(n+k) (1+bx)^(-r) via the
// binomial series in 1/(bx); valid once b*X >> r.
double tsallis_tail_series(double A, double b, double r, double nk, double X) {
  const double z = 1.0 / (b * X);
  double coef = 1.0;
  double powz = 1.0;
  double sum = 0.0;
  for (int j = 0; j < 80; ++j) {
    const double term = coef * powz / (r + j - nk - 1.0);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    coef *= -(r + j) / (j + 1.0);
    powz *= z;
  }
  return A * std::exp(-r * std::log(b) + (nk + 1.0 - r) * std::log(X)) * sum;
}

// integral over [x, inf) of coeff t^(a+k) exp(-t/beta).
double gamma_term_upper(double coeff, double a, double beta, int k, double x,
                        double rel_tol) {
  const double p = a + k;
  double cut = std::max({x, beta, 4.0 * (std::abs(p) + 1.0) * beta});
  // extend until the integrand underflows; beyond that the remainder is 0
  int guard = 0;
  while (std::log(coeff) + log_gamma_weight(p, beta, cut) > -760.0 && ++guard < 90)
    cut *= 2.0;
  if (cut <= x) return 0.0;
  if (std::log(coeff) + log_gamma_weight(p, beta, std::max(x, beta * 1e-12)) < -760.0 &&
      x > beta)
    return 0.0;
  auto f = [&](double t) { return coeff * std::exp(log_gamma_weight(p, beta, t)); };
  return quad::integrate(f, x, cut, {rel_tol, 0.0});
}

// integral over [x, inf) of t^k * tsallis_pdf(t).
double tsallis_upper(const TsallisParams& p, int k, double x, double rel_tol) {
  if (k == 1 && !p.finite_mean())
    throw DivergenceError("first moment of the power-tail density diverges");
  if (p.is_exponential_family())
    return gamma_term_upper(p.amplitude, p.n, 1.0 / p.beta_star, k, x, rel_tol);

  const double r = p.shape_r();
  const double b = p.shape_b();
  const double nk = p.n + k;
  // Tail handled analytically beyond x_cut; the 32 r / b floor keeps the
  // series strongly convergent, the 1e3/beta_star floor keeps the
  // quadrature region comfortably past the exponential-like shoulder.
  const double x_cut = std::max(1e3 / p.beta_star, 32.0 * std::max(r, 1.0) / b);

  if (x >= x_cut) return tsallis_tail_series(p.amplitude, b, r, nk, x);

  auto f = [&](double t) {
    return p.amplitude * std::exp(log_tsallis_weight(nk, b, r, t));
  };

  // Near q = 1 the weight underflows long before x_cut; integrate to the
  // underflow point instead and drop the (zero) remainder.
  const double log_at_cut = std::log(p.amplitude) + log_tsallis_weight(nk, b, r, x_cut);
  if (log_at_cut < -745.0) {
    double cut = std::max(x, 1.0 / p.beta_star);
    int guard = 0;
    while (std::log(p.amplitude) + log_tsallis_weight(nk, b, r, cut) > -760.0 &&
           ++guard < 90)
      cut *= 2.0;
    if (cut <= x) return 0.0;
    return quad::integrate(f, x, cut, {rel_tol, 0.0});
  }

  const double tail = tsallis_tail_series(p.amplitude, b, r, nk, x_cut);
  return quad::integrate(f, x, x_cut, {rel_tol, 0.0}) + tail;
}

double spec_upper_moment(const DistSpec& spec, double x, int k, double rel_tol) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TsallisParams>) {
          return tsallis_upper(p, k, x, rel_tol);
        } else if constexpr (std::is_same_v<T, GammaMixParams>) {
          double v = 0.0;
          for (const auto& t : p.terms)
            v += gamma_term_upper(t.coeff, t.exponent, p.beta, k, x, rel_tol);
          return v;
        } else {
          double v = 0.0;
          for (const auto& t : p.B.terms)
            v += p.w_B * gamma_term_upper(t.coeff, t.exponent, p.B.beta, k, x, rel_tol);
          v += p.w_T * tsallis_upper(p.T, k, x, rel_tol);
          return v;
        }
      },
      spec);
}

}  // namespace

// ---- validation ---------------------------------------------------------

void validate(const TsallisParams& p) {
  if (!finite_positive(p.amplitude))
    throw InvalidParamsError("tsallis: amplitude must be positive");
  if (!std::isfinite(p.q) || p.q < 1.0 || p.q >= 2.0)
    throw InvalidParamsError("tsallis: q must lie in [1, 2)");
  if (!finite_positive(p.beta_star))
    throw InvalidParamsError("tsallis: beta_star must be positive");
  if (!std::isfinite(p.n) || p.n <= -1.0)
    throw InvalidParamsError("tsallis: n must exceed -1");
  if (p.q > 1.0 && !(p.n + 1.0 < p.shape_r()))
    throw InvalidParamsError("tsallis: n + 1 must be below 1/(q-1) for a finite integral");
}

void validate(const GammaMixParams& p) {
  if (p.terms.empty()) throw InvalidParamsError("gamma_mix: needs at least one term");
  if (!finite_positive(p.beta)) throw InvalidParamsError("gamma_mix: beta must be positive");
  for (const auto& t : p.terms) {
    if (!finite_positive(t.coeff))
      throw InvalidParamsError("gamma_mix: term coefficients must be positive");
    if (!std::isfinite(t.exponent) || t.exponent <= -1.0)
      throw InvalidParamsError("gamma_mix: term exponents must exceed -1");
  }
}

void validate(const MixtureModel& m, bool check_component_mass) {
  if (!std::isfinite(m.w_B) || m.w_B < 0.0 || m.w_B > 1.0 || !std::isfinite(m.w_T) ||
      m.w_T < 0.0 || m.w_T > 1.0)
    throw InvalidParamsError("mixture: weights must lie in [0, 1]");
  if (std::abs(m.w_B + m.w_T - 1.0) > 1e-12)
    throw InvalidParamsError("mixture: weights must sum to 1");
  validate(m.B);
  validate(m.T);
  if (check_component_mass) {
    if (std::abs(total_mass(m.B) - 1.0) > 1e-6 || std::abs(total_mass(m.T) - 1.0) > 1e-6)
      throw InvalidParamsError("mixture: components must each integrate to 1");
  }
}

void validate(const DistSpec& spec, bool check_component_mass) {
  std::visit(
      [check_component_mass](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MixtureModel>)
          validate(p, check_component_mass);
        else
          validate(p);
      },
      spec);
}

// ---- masses, pdf, ccdf ---------------------------------------------------

double total_mass(const TsallisParams& p) { return tsallis_moment(p, 0); }

double total_mass(const GammaMixParams& p) {
  double v = 0.0;
  for (const auto& t : p.terms) v += gamma_term_moment(t.coeff, t.exponent, p.beta, 0);
  return v;
}

double total_mass(const DistSpec& spec) {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MixtureModel>)
          return p.w_B * total_mass(p.B) + p.w_T * total_mass(p.T);
        else
          return total_mass(p);
      },
      spec);
}

double eval_pdf(const DistSpec& spec, double x) {
  validate(spec);
  if (x < 0.0 || !std::isfinite(x)) throw DomainError("eval_pdf: x must be a finite nonnegative real");
  return spec_pdf(spec, x);
}

double upper_moment(const DistSpec& spec, double x, int k, double rel_tol) {
  if (x < 0.0 || !std::isfinite(x)) throw DomainError("upper_moment: x must be nonnegative");
  if (k != 0 && k != 1) throw DomainError("upper_moment: k must be 0 or 1");
  return spec_upper_moment(spec, x, k, rel_tol);
}

double eval_ccdf(const DistSpec& spec, double x, double rel_tol) {
  validate(spec);
  if (x < 0.0 || !std::isfinite(x)) throw DomainError("eval_ccdf: x must be a finite nonnegative real");
  if (x == 0.0) return std::clamp(total_mass(spec), 0.0, 1.0);
  return std::clamp(spec_upper_moment(spec, x, 0, rel_tol), 0.0, 1.0);
}

std::vector<double> eval_ccdf_batch(const DistSpec& spec, const std::vector<double>& xs,
                                    double rel_tol) {
  validate(spec);
  const std::size_t n = xs.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  for (double x : xs)
    if (x < 0.0 || !std::isfinite(x))
      throw DomainError("eval_ccdf_batch: points must be finite and nonnegative");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });

  // One tail evaluation at the largest point, then stitch the interior
  // with per-segment integrals of the pdf.
  std::vector<double> q(n);
  const double x_last = xs[order.back()];
  double acc = x_last == 0.0 ? std::clamp(total_mass(spec), 0.0, 1.0)
                             : spec_upper_moment(spec, x_last, 0, rel_tol);
  q[order.back()] = acc;
  auto f = [&spec](double t) { return spec_pdf(spec, t); };
  for (std::size_t idx = n - 1; idx-- > 0;) {
    const double lo = xs[order[idx]];
    const double hi = xs[order[idx + 1]];
    if (hi > lo) {
      if (lo == 0.0)
        acc = std::clamp(total_mass(spec), 0.0, 1.0);
      else
        acc += quad::integrate(f, lo, hi, {rel_tol, 0.0});
    }
    q[order[idx]] = acc;
  }
  for (double& v : q) v = std::clamp(v, 0.0, 1.0);
  return q;
}

// ---- normalize -----------------------------------------------------------

DistSpec normalize(const DistSpec& spec) {
  return std::visit(
      [](const auto& p) -> DistSpec {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TsallisParams>) {
          if (!(p.n > -1.0) || (p.q > 1.0 && !(p.n + 1.0 < p.shape_r())))
            throw DivergenceError("normalize: total integral diverges for these shape parameters");
          validate(p);
          TsallisParams out = p;
          out.amplitude /= total_mass(p);
          return out;
        } else if constexpr (std::is_same_v<T, GammaMixParams>) {
          for (const auto& t : p.terms)
            if (!(t.exponent > -1.0))
              throw DivergenceError("normalize: total integral diverges for these shape parameters");
          validate(p);
          GammaMixParams out = p;
          const double mass = total_mass(p);
          for (auto& t : out.terms) t.coeff /= mass;
          return out;
        } else {
          validate(p, false);
          MixtureModel out = p;
          out.B = std::get<GammaMixParams>(normalize(DistSpec{p.B}));
          out.T = std::get<TsallisParams>(normalize(DistSpec{p.T}));
          return out;
        }
      },
      spec);
}

// ---- tail exponent and mean ----------------------------------------------

TailExponent tail_exponent(const TsallisParams& p) {
  validate(p);
  if (p.q == 1.0)
    throw DomainError("tail_exponent: the q = 1 (exponential) form has no power tail");
  const double pdf_slope = p.n + 1.0 / (1.0 - p.q);
  return {pdf_slope, pdf_slope + 1.0};
}

double dist_mean(const DistSpec& spec) {
  validate(spec);
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TsallisParams>) {
          if (!p.finite_mean())
            throw DivergenceError("dist_mean: mean diverges (n + 2 >= 1/(q-1))");
          // (n+1) / (beta_star [1 + (n+2)(1-q)]); the q = 1 limit is (n+1)/beta_star.
          return (p.n + 1.0) / (p.beta_star * (1.0 + (p.n + 2.0) * (1.0 - p.q)));
        } else if constexpr (std::is_same_v<T, GammaMixParams>) {
          double mass = 0.0, m1 = 0.0;
          for (const auto& t : p.terms) {
            const double m = gamma_term_moment(t.coeff, t.exponent, p.beta, 0);
            mass += m;
            m1 += m * (t.exponent + 1.0) * p.beta;  // term mean is (exponent+1) beta
          }
          return m1 / mass;
        } else {
          const double mB = p.w_B * total_mass(p.B);
          const double mT = p.w_T * total_mass(p.T);
          return (mB * dist_mean(DistSpec{p.B}) + mT * dist_mean(DistSpec{p.T})) / (mB + mT);
        }
      },
      spec);
}

// ---- sampling --------------------------------------------------------------

Sampler::Sampler(const DistSpec& spec) {
  validate(spec);
  const double mass = total_mass(spec);
  if (std::abs(mass - 1.0) > 1e-6)
    throw InvalidParamsError("Sampler: spec must be normalized to unit integral");

  // Characteristic scale for the grid search.
  double scale;
  try {
    scale = dist_mean(spec);
  } catch (const DivergenceError&) {
    scale = 1.0;
    while (spec_upper_moment(spec, scale, 0, 1e-6) > 0.5 && scale < 1e12) scale *= 2.0;
  }

  double x_lo = scale * 1e-3;
  for (int i = 0; i < 80; ++i) {
    const double below = mass - spec_upper_moment(spec, x_lo, 0, 1e-9);
    if (below <= 1e-7) break;
    x_lo /= 8.0;
  }
  double x_hi = scale;
  for (int i = 0; i < 400 && spec_upper_moment(spec, x_hi, 0, 1e-6) > 1e-9; ++i) x_hi *= 2.0;

  constexpr int kGrid = 1024;
  std::vector<double> xs(kGrid);
  const double la = std::log(x_lo), lb = std::log(x_hi);
  for (int i = 0; i < kGrid; ++i)
    xs[i] = std::exp(la + (lb - la) * static_cast<double>(i) / (kGrid - 1));
  const std::vector<double> q = eval_ccdf_batch(spec, xs, 1e-9);

  log_x_.reserve(kGrid);
  log_q_.reserve(kGrid);
  double prev_q = kInf;
  for (int i = 0; i < kGrid; ++i) {
    if (q[i] <= 0.0) break;
    if (q[i] >= prev_q) continue;  // keep the table strictly decreasing
    log_x_.push_back(std::log(xs[i]));
    log_q_.push_back(std::log(q[i]));
    prev_q = q[i];
  }
  if (log_x_.size() < 2)
    throw InvalidParamsError("Sampler: could not build an invertible ccdf table");
}

double Sampler::invert(double u) const {
  if (!(u > 0.0) || u > 1.0) throw DomainError("Sampler::invert: u must lie in (0, 1]");
  const double lu = std::log(u);
  if (lu >= log_q_.front()) return std::exp(log_x_.front());
  if (lu <= log_q_.back()) return std::exp(log_x_.back());
  // log_q_ is strictly decreasing; find the bracketing segment.
  std::size_t lo = 0, hi = log_q_.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (log_q_[mid] > lu)
      lo = mid;
    else
      hi = mid;
  }
  const double t = (lu - log_q_[lo]) / (log_q_[hi] - log_q_[lo]);
  return std::exp(log_x_[lo] + t * (log_x_[hi] - log_x_[lo]));
}

double Sampler::x_min() const { return std::exp(log_x_.front()); }
double Sampler::x_max() const { return std::exp(log_x_.back()); }

std::vector<double> sample(const DistSpec& spec, long long count, std::uint64_t seed) {
  if (count < 0) throw DomainError("sample: count must be nonnegative");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 0) return out;
  const Sampler sampler(spec);
  Xoshiro256pp rng = make_stream(seed, 0);
  for (long long i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

// ---- JSON ------------------------------------------------------------------

namespace {

using nlohmann::json;

json tsallis_to_json(const TsallisParams& p) {
  return json{{"family", "tsallis"},
              {"amplitude", p.amplitude},
              {"q", p.q},
              {"beta_star", p.beta_star},
              {"n", p.n}};
}

json gamma_mix_to_json(const GammaMixParams& p) {
  json terms = json::array();
  for (const auto& t : p.terms) terms.push_back({{"coeff", t.coeff}, {"exponent", t.exponent}});
  return json{{"family", "gamma_mix"}, {"beta", p.beta}, {"terms", terms}};
}

double need_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ParseError(std::string("expected numeric field \"") + key + "\"", 1);
  return j.at(key).get<double>();
}

TsallisParams tsallis_from_json(const json& j) {
  TsallisParams p;
  p.amplitude = need_number(j, "amplitude");
  p.q = need_number(j, "q");
  p.beta_star = need_number(j, "beta_star");
  p.n = need_number(j, "n");
  return p;
}

GammaMixParams gamma_mix_from_json(const json& j) {
  GammaMixParams p;
  p.beta = need_number(j, "beta");
  if (!j.contains("terms") || !j.at("terms").is_array())
    throw ParseError("expected array field \"terms\"", 1);
  for (const auto& t : j.at("terms"))
    p.terms.push_back({need_number(t, "coeff"), need_number(t, "exponent")});
  return p;
}

}  // namespace

std::string to_json(const DistSpec& spec, int indent) {
  json j = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TsallisParams>) {
          return tsallis_to_json(p);
        } else if constexpr (std::is_same_v<T, GammaMixParams>) {
          return gamma_mix_to_json(p);
        } else {
          return json{{"family", "mixture"},
                      {"w_B", p.w_B},
                      {"B", gamma_mix_to_json(p.B)},
                      {"w_T", p.w_T},
                      {"T", tsallis_to_json(p.T)}};
        }
      },
      spec);
  return j.dump(indent);
}

DistSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1);
  }
  if (!j.contains("family") || !j.at("family").is_string())
    throw ParseError("distribution document needs a \"family\" tag", 1);
  const std::string family = j.at("family").get<std::string>();
  DistSpec spec;
  if (family == "tsallis") {
    spec = tsallis_from_json(j);
  } else if (family == "gamma_mix") {
    spec = gamma_mix_from_json(j);
  } else if (family == "mixture") {
    MixtureModel m;
    m.w_B = need_number(j, "w_B");
    m.w_T = need_number(j, "w_T");
    if (!j.contains("B") || !j.contains("T"))
      throw ParseError("mixture document needs \"B\" and \"T\" components", 1);
    m.B = gamma_mix_from_json(j.at("B"));
    m.T = tsallis_from_json(j.at("T"));
    spec = m;
  } else {
    throw ParseError("unknown distribution family \"" + family + "\"", 1);
  }
  validate(spec);
  return spec;
}

}  // namespace econokin::dist
