#include "fraudscore/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fraudscore/error.hpp"

namespace fraudscore::optim {
namespace {

using Point = std::vector<double>;

// p = base + scale * (towards - base)
Point along(const Point& base, const Point& towards, double scale) {
  Point out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + scale * (towards[i] - base[i]);
  return out;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& objective, std::vector<double> initial,
                             const NelderMeadOptions& options) {
  const std::size_t n = initial.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Nelder-Mead needs at least one dimension");
  if (!options.initial_step.empty() && options.initial_step.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "initial_step size does not match the point");
  }

  NelderMeadResult result;
  auto eval = [&](const Point& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Point> simplex(n + 1, initial);
  for (std::size_t i = 0; i < n; ++i) {
    double step = options.initial_step.empty()
                      ? (initial[i] != 0.0 ? 0.05 * initial[i] : 0.00025)
                      : options.initial_step[i];
    simplex[i + 1][i] += step;
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);
  if (std::none_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorKind::NoProgress, "objective is infinite at every initial simplex vertex");
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Point> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  sort_simplex();
  Point centroid(n);
  while (result.iterations < options.max_iter) {
    if (values[n] - values[0] < options.tolerance) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i];
    for (double& c : centroid) c /= static_cast<double>(n);

    const Point reflected = along(centroid, simplex[n], -options.reflection);
    const double f_reflected = eval(reflected);

    if (f_reflected < values[0]) {
      const Point expanded = along(centroid, reflected, options.expansion);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[n] = expanded;
        values[n] = f_expanded;
      } else {
        simplex[n] = reflected;
        values[n] = f_reflected;
      }
    } else if (f_reflected < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = f_reflected;
    } else {
      const bool outside = f_reflected < values[n];
      const Point contracted = outside ? along(centroid, reflected, options.contraction)
                                       : along(centroid, simplex[n], options.contraction);
      const double f_contracted = eval(contracted);
      if (f_contracted < (outside ? f_reflected : values[n])) {
        simplex[n] = contracted;
        values[n] = f_contracted;
      } else {
        for (std::size_t j = 1; j <= n; ++j) {
          simplex[j] = along(simplex[0], simplex[j], options.shrink);
          values[j] = eval(simplex[j]);
        }
      }
    }
    sort_simplex();
    result.best_history.push_back(values[0]);
  }

  result.point = simplex[0];
  result.value = values[0];
  return result;
}

}  // namespace fraudscore::optim
