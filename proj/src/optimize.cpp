#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gedecomp::detail {
namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

double safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

OptimumResult run_once(const std::function<double(const std::vector<double>&)>& f,
                       const std::vector<double>& x0, double step, std::size_t budget,
                       double ftol) {
  const std::size_t n = x0.size();
  Simplex s;
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return safe(f(x));
  };
  s.points.push_back(x0);
  s.values.push_back(eval(x0));
  for (std::size_t i = 0; i < n; ++i) {
    auto x = x0;
    x[i] += step;
    s.points.push_back(x);
    s.values.push_back(eval(x));
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n);
  auto affine = [&](double t, const std::vector<double>& from) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + t * (from[i] - centroid[i]);
    return x;
  };

  while (evals < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];
    if (std::isfinite(s.values[worst]) &&
        s.values[worst] - s.values[best] <= ftol * (1.0 + std::abs(s.values[best]))) {
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k : order) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s.points[k][i] / static_cast<double>(n);
    }

    const auto reflected = affine(-1.0, s.points[worst]);
    const double fr = eval(reflected);
    if (fr < s.values[best]) {
      const auto expanded = affine(-2.0, s.points[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        s.points[worst] = expanded;
        s.values[worst] = fe;
      } else {
        s.points[worst] = reflected;
        s.values[worst] = fr;
      }
      continue;
    }
    if (fr < s.values[second]) {
      s.points[worst] = reflected;
      s.values[worst] = fr;
      continue;
    }
    const bool outside = fr < s.values[worst];
    const auto contracted = affine(outside ? -0.5 : 0.5, s.points[worst]);
    const double fc = eval(contracted);
    if (fc < std::min(fr, s.values[worst])) {
      s.points[worst] = contracted;
      s.values[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) {
        s.points[k][i] = s.points[best][i] + 0.5 * (s.points[k][i] - s.points[best][i]);
      }
      s.values[k] = eval(s.points[k]);
    }
  }
  const auto it = std::min_element(s.values.begin(), s.values.end());
  const auto idx = static_cast<std::size_t>(it - s.values.begin());
  return {s.points[idx], *it, evals};
}

}  // namespace

OptimumResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, std::size_t max_evaluations,
                          double ftol) {
  OptimumResult best{x0, safe(f(x0)), 1};
  std::size_t used = 1;
  double current_step = step;
  while (used < max_evaluations) {
    auto r = run_once(f, best.x, current_step, max_evaluations - used, ftol);
    used += r.evaluations;
    const bool improved = r.value < best.value - ftol * (1.0 + std::abs(best.value));
    if (r.value < best.value) {
      best.x = std::move(r.x);
      best.value = r.value;
    }
    if (!improved) break;
    current_step = std::max(current_step * 0.5, 1e-3);
  }
  best.evaluations = used;
  return best;
}

std::vector<double> hessian(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x, double h) {
  const std::size_t n = x.size();
  std::vector<double> out(n * n);
  const double f0 = f(x);
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    auto y = x;
    y[i] += di;
    y[j] += dj;
    return f(y);
  };
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = (at(i, h, i, 0.0) - 2.0 * f0 + at(i, -h, i, 0.0)) / (h * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v =
          (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
      out[i * n + j] = v;
      out[j * n + i] = v;
    }
  }
  return out;
}

}  // namespace gedecomp::detail
