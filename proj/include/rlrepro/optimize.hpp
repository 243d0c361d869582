#pragma once

// Derivative-free minimization by the Nelder–Mead simplex method
// (reflection 1, expansion 2, contraction ½, shrink ½).
//
// Converged means both: the spread of objective values across the simplex
// is at most f_rel_tol · max(|f_best|, 1), and every vertex lies within
// x_tol of the best vertex in the max-norm. Callers are expected to work in
// coordinates where x_tol is a relative tolerance (log-scales, offsets in
// units of a reference scale).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace rlrepro {

struct NelderMeadOptions {
  int max_iterations = 5000;
  double f_rel_tol = 1e-8;
  double x_tol = 1e-6;
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

template <class F>
NelderMeadResult nelder_mead(F&& objective, std::vector<double> start,
                             const NelderMeadOptions& opt = {}) {
  const std::size_t dim = start.size();
  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += opt.initial_step;

  NelderMeadResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    const double v = objective(x);
    return std::isnan(v) ? HUGE_VAL : v;
  };

  std::vector<double> fv(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s(dim + 1);
    std::vector<double> f(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
      s[i] = std::move(simplex[order[i]]);
      f[i] = fv[order[i]];
    }
    simplex = std::move(s);
    fv = std::move(f);
  };

  auto is_converged = [&] {
    const double spread = fv[dim] - fv[0];
    if (!(spread <= opt.f_rel_tol * std::max(std::fabs(fv[0]), 1.0)))
      return false;
    for (std::size_t i = 1; i <= dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        if (std::fabs(simplex[i][j] - simplex[0][j]) > opt.x_tol) return false;
    return true;
  };

  sort_simplex();
  for (out.iterations = 0; out.iterations < opt.max_iterations;
       ++out.iterations) {
    if (is_converged()) {
      out.converged = true;
      break;
    }
    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
    for (auto& c : centroid) c /= static_cast<double>(dim);

    const auto& worst = simplex[dim];
    for (std::size_t j = 0; j < dim; ++j)
      trial[j] = centroid[j] + (centroid[j] - worst[j]);
    const double fr = eval(trial);

    if (fr < fv[0]) {
      for (std::size_t j = 0; j < dim; ++j)
        trial2[j] = centroid[j] + 2.0 * (centroid[j] - worst[j]);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[dim] = trial2;
        fv[dim] = fe;
      } else {
        simplex[dim] = trial;
        fv[dim] = fr;
      }
    } else if (fr < fv[dim - 1]) {
      simplex[dim] = trial;
      fv[dim] = fr;
    } else {
      // Contract toward the better of the reflected and worst points.
      const bool outside = fr < fv[dim];
      for (std::size_t j = 0; j < dim; ++j)
        trial2[j] = outside ? centroid[j] + 0.5 * (trial[j] - centroid[j])
                            : centroid[j] + 0.5 * (worst[j] - centroid[j]);
      const double fc = eval(trial2);
      if (fc < std::min(fr, fv[dim])) {
        simplex[dim] = trial2;
        fv[dim] = fc;
      } else {
        for (std::size_t i = 1; i <= dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j)
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  if (!out.converged && is_converged()) out.converged = true;
  out.x = simplex[0];
  out.f = fv[0];
  return out;
}

}  // namespace rlrepro
