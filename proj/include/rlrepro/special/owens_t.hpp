#pragma once

// Owen's T function
//
//   T(h, a) = 1/(2π) ∫₀^a exp(−h²(1 + x²)/2) / (1 + x²) dx.
//
// For 0 ≤ a ≤ 1 we use Owen's (1956) series
//
//   2π T(h, a) = arctan(a) − Σ_{j≥0} c_j a^{2j+1},
//   c_j = (−1)^j / (2j + 1) · P(j + 1, h²/2),
//
// where P(j + 1, q) = 1 − e^{−q} Σ_{i≤j} qⁱ/i! is a Poisson upper tail; the
// terms die off once j exceeds q. For a > 1 the argument is folded with
//
//   T(h, a) = ½Φ(h) + ½Φ(ah) − Φ(h)Φ(ah) − T(ah, 1/a) − [h < 0]/2,
//
// applied with h ≥ 0 (T is even in h) and the oddness T(h, −a) = −T(h, a).

#include <cmath>
#include <numbers>

#include "rlrepro/special/normal.hpp"

namespace rlrepro::special {

namespace detail {

// 0 ≤ a ≤ 1, h ≥ 0.
inline double owens_t_series(double h, double a) {
  const double q = 0.5 * h * h;
  const double a2 = a * a;
  // Beyond h ≈ 38.6 the integrand underflows everywhere on [0, a].
  if (q > 745.0) return 0.0;

  const double eq = std::exp(-q);
  double poisson_term = eq;  // e^{−q} q^j / j!
  double poisson_cdf = eq;   // e^{−q} Σ_{i≤j} q^i / i!
  double apow = a;           // a^{2j+1}
  double sum = 0.0;
  for (int j = 0; j < 100000; ++j) {
    const double upper = 1.0 - poisson_cdf;
    const double term = apow * upper / (2.0 * j + 1.0);
    sum += (j % 2 == 0) ? term : -term;
    if (j > q && term < 1e-18) break;
    apow *= a2;
    poisson_term *= q / (j + 1.0);
    poisson_cdf += poisson_term;
    if (apow == 0.0) break;
  }
  return (std::atan(a) - sum) / (2.0 * std::numbers::pi);
}

}  // namespace detail

inline double owens_t(double h, double a) {
  if (a == 0.0) return 0.0;
  if (a < 0.0) return -owens_t(h, -a);
  h = std::fabs(h);
  if (h == 0.0) return std::atan(a) / (2.0 * std::numbers::pi);
  if (std::isinf(a)) return 0.5 * std_normal_sf(h);
  if (a <= 1.0) return detail::owens_t_series(h, a);

  const double ah = a * h;
  // ½Φ(h) + ½Φ(ah) − Φ(h)Φ(ah), regrouped to avoid cancellation.
  const double folded =
      0.5 * (std_normal_cdf(h) * std_normal_sf(ah) +
             std_normal_cdf(ah) * std_normal_sf(h));
  return folded - detail::owens_t_series(ah, 1.0 / a);
}

}  // namespace rlrepro::special
