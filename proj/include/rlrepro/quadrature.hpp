#pragma once

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "rlrepro/error.hpp"

namespace rlrepro {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// QUADPACK qk15 abscissae/weights; the 7-point Gauss rule uses the odd
// indexed Kronrod nodes.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kronrod_w[7];
  double gauss = fc * gauss_w[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kronrod_x[j];
    const double pair = f(c - dx) + f(c + dx);
    kronrod += kronrod_w[j] * pair;
    if (j % 2 == 1) gauss += gauss_w[j / 2] * pair;
  }
  return {a, b, kronrod * h, std::fabs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss–Kronrod quadrature of f over [a, b],
/// seeded with `initial_panels` equal subintervals.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                           double rel_tol = 1e-10, int initial_panels = 8,
                           int max_panels = 4000) {
  std::priority_queue<detail::Panel> heap;
  double total = 0.0;
  double error = 0.0;
  const double width = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == initial_panels) ? b : lo + width;
    auto p = detail::gauss_kronrod_15(f, lo, hi);
    total += p.value;
    error += p.error;
    heap.push(p);
  }
  int panels = initial_panels;
  while (error > std::fmax(abs_tol, rel_tol * std::fabs(total)) &&
         panels < max_panels) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-add from the panels to shed accumulated update round-off.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total))
    throw NumericError("quadrature produced a non-finite value");
  return {total, error, panels};
}

}  // namespace rlrepro
