#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "econokin/errors.hpp"

namespace econokin::quad {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

// One GK15 evaluation over [a, b]; returns (integral, error estimate).
template <class F>
Panel gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = fc * kGaussWeights[3];
  double kron = fc * kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double fsum = f(c - dx) + f(c + dx);
    kron += fsum * kKronrodWeights[i];
    if (i % 2 == 1) gauss += fsum * kGaussWeights[i / 2];
  }
  const double value = kron * h;
  double err = std::abs((kron - gauss) * h);
  // Standard QUADPACK-style error sharpening.
  double resasc = 0.0;
  const double mean = kron * 0.5;
  resasc += std::abs(fc - mean) * kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    resasc +=
        (std::abs(f(c - dx) - mean) + std::abs(f(c + dx) - mean)) * kKronrodWeights[i];
  }
  resasc *= std::abs(h);
  if (resasc != 0.0 && err != 0.0) {
    const double scaled = std::pow(200.0 * err / resasc, 1.5);
    if (scaled < 1.0) err = resasc * scaled;
  }
  return {a, b, value, err};
}

}  // namespace detail

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_panels = 4000;
};

// Adaptive GK15 over the finite interval [a, b]. Wide intervals with a > 0
// are pre-split geometrically so that slowly decaying integrands converge
// in O(log(b/a)) panels.
template <class F>
double integrate(F&& f, double a, double b, Options opt = {}) {
  if (!(b > a)) return 0.0;
  std::vector<detail::Panel> panels;
  if (a > 0.0 && b / a > 16.0) {
    double lo = a;
    while (lo < b) {
      const double hi = std::min(b, lo * 4.0);
      panels.push_back(detail::gk15(f, lo, hi));
      lo = hi;
    }
  } else {
    panels.push_back(detail::gk15(f, a, b));
  }

  auto totals = [&panels]() {
    double v = 0.0, e = 0.0;
    for (const auto& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair<double, double>(v, e);
  };

  for (;;) {
    auto [value, error] = totals();
    const double bound = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    if (error <= bound || error == 0.0) return value;
    if (static_cast<int>(panels.size()) >= opt.max_panels)
      throw QuadratureError("adaptive quadrature failed to reach tolerance");
    // Split the panel with the largest error estimate.
    auto worst = std::max_element(
        panels.begin(), panels.end(),
        [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; });
    const double wa = worst->a, wb = worst->b;
    const double mid = 0.5 * (wa + wb);
    if (!(mid > wa && mid < wb))
      throw QuadratureError("adaptive quadrature hit interval resolution limit");
    *worst = detail::gk15(f, wa, mid);
    panels.push_back(detail::gk15(f, mid, wb));
  }
}

}  // namespace econokin::quad
