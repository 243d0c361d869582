// Randomized properties of the numeric kernels. Generators are seeded, so a
// failure reproduces exactly; the trial index is printed with each failure.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rlrepro/distributions.hpp"
#include "rlrepro/rng.hpp"
#include "rlrepro/special.hpp"

using namespace rlrepro;
using namespace rlrepro::special;

namespace {

double log_uniform(SeededRng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

std::vector<double> sorted_grid(SeededRng& rng, double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = lo + (hi - lo) * rng.uniform();
  std::sort(xs.begin(), xs.end());
  return xs;
}

// Parameters in the ranges the published fits occupy, plus some harder ones.
Distribution random_distribution(Family f, SeededRng& rng) {
  const double loc = rng.normal(0.0, 50.0);
  const double scale = log_uniform(rng, 0.1, 100.0);
  switch (f) {
    case Family::normal:
      return make_distribution(f, {loc, scale});
    case Family::beta:
      return make_distribution(f, {log_uniform(rng, 0.3, 900.0), log_uniform(rng, 0.3, 900.0), loc, scale});
    case Family::johnsonsb:
    case Family::johnsonsu:
      return make_distribution(f, {rng.normal(0.0, 5.0), log_uniform(rng, 0.3, 20.0), loc, scale});
    case Family::loggamma:
      return make_distribution(f, {log_uniform(rng, 0.2, 700.0), loc, scale});
    case Family::powernorm:
      return make_distribution(f, {log_uniform(rng, 0.2, 10.0), loc, scale});
    case Family::skewnorm:
      return make_distribution(f, {rng.normal(0.0, 4.0), loc, scale});
  }
  return {};
}

TEST(Property, SpecialCdfsBoundedAndMonotone) {
  SeededRng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = log_uniform(rng, 0.05, 500.0), b = log_uniform(rng, 0.05, 500.0);
    const double h = rng.normal(0.0, 3.0);
    double pn = -1, pg = -1, pb = -1, pk = 2;
    for (double u : sorted_grid(rng, 0.0, 1.0, 64)) {
      const double n = std_normal_cdf(-10.0 + 20.0 * u);
      const double g = reg_inc_gamma_lower(a, 3.0 * a * u);
      const double bb = reg_inc_beta(a, b, u);
      const double k = kolmogorov_sf(3.0 * u);
      for (double v : {n, g, bb, k}) {
        ASSERT_GE(v, 0.0) << trial;
        ASSERT_LE(v, 1.0) << trial;
      }
      EXPECT_GE(n, pn) << trial;
      EXPECT_GE(g, pg) << trial;
      EXPECT_GE(bb, pb) << trial;
      EXPECT_LE(k, pk) << trial;
      pn = n, pg = g, pb = bb, pk = k;
    }
    double prev_t = -1.0;
    for (double x : sorted_grid(rng, -5.0, 5.0, 32)) {
      // Φ(x) − 2T(x, a) is the skew-normal CDF; monotone in x.
      const double sn = std_normal_cdf(x) - 2.0 * owens_t(x, h);
      EXPECT_GE(sn, prev_t - 1e-15) << trial;
      prev_t = sn;
    }
  }
}

TEST(Property, OwensTSymmetry) {
  SeededRng rng(202);
  for (int trial = 0; trial < 500; ++trial) {
    const double h = rng.normal(0.0, 3.0), a = rng.normal(0.0, 5.0);
    EXPECT_NEAR(owens_t(h, -a), -owens_t(h, a), 1e-12) << trial;
    EXPECT_NEAR(owens_t(-h, a), owens_t(h, a), 1e-12) << trial;
  }
}

TEST(Property, KsPvalueNonIncreasingInD) {
  SeededRng rng(303);
  for (int trial = 0; trial < 40; ++trial) {
    const long n = 1 + static_cast<long>(rng.bounded(rng.bounded(2) ? 200 : 20000));
    double prev = 1.0, prev_asym = 1.0;
    for (double d : sorted_grid(rng, 0.0, std::min(1.0, 8.0 / std::sqrt(static_cast<double>(n))), 40)) {
      const double p = ks_one_sample_pvalue(d, n);
      const double pa = ks_one_sample_pvalue(d, n, KsMode::asymptotic);
      EXPECT_LE(p, prev + 1e-12) << trial << " n " << n << " d " << d;
      EXPECT_LE(pa, prev_asym + 1e-15) << trial;
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      prev = p;
      prev_asym = pa;
    }
  }
}

TEST(Property, NormalQuantileInverse) {
  SeededRng rng(404);
  for (int trial = 0; trial < 2000; ++trial) {
    const double p = rng.uniform_open();
    EXPECT_NEAR(std_normal_cdf(std_normal_quantile(p)), p, 1e-14 + 1e-12 * p) << trial;
  }
}

TEST(Property, FamilyCdfQuantileAndComplement) {
  SeededRng rng(505);
  for (const auto& fi : family_registry) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto d = random_distribution(fi.family, rng);
      double prev = -HUGE_VAL;
      for (int k = 1; k <= 99; ++k) {
        const double p = k / 100.0;
        const double x = quantile(d, p);
        // Mass piled against a bound can make one ulp of x worth more than
        // 1e-8 in probability; then x must be the double that brackets p.
        const double below = cdf(d, std::nextafter(x, -HUGE_VAL)), above = cdf(d, std::nextafter(x, HUGE_VAL));
        const bool bracketed = below <= p + 1e-12 && p <= above + 1e-12;
        EXPECT_TRUE(std::fabs(cdf(d, x) - p) <= 1e-8 || bracketed)
            << fi.name << " trial " << trial << " p " << p << " x " << x;
        EXPECT_NEAR(cdf(d, x) + sf(d, x), 1.0, 1e-12) << fi.name;
        EXPECT_GE(x, prev) << fi.name;
        prev = x;
      }
    }
  }
}

TEST(Property, FamilyCdfMonotoneOnRandomGrids) {
  SeededRng rng(606);
  for (const auto& fi : family_registry) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto d = random_distribution(fi.family, rng);
      const double lo = quantile(d, 1e-6), hi = quantile(d, 1.0 - 1e-6);
      const double pad = 0.2 * (hi - lo);
      double prev = 0.0;
      for (double x : sorted_grid(rng, lo - pad, hi + pad, 200)) {
        const double c = cdf(d, x);
        ASSERT_GE(c, 0.0);
        ASSERT_LE(c, 1.0);
        EXPECT_GE(c, prev - 1e-15) << fi.name << " trial " << trial << " x " << x;
        EXPECT_GE(pdf(d, x), 0.0);
        prev = c;
      }
    }
  }
}

}  // namespace
