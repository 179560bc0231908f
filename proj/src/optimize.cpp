#include "netreduce/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace netreduce {

namespace {

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    for (std::size_t i : idx) {
      xs.push_back(x[i]);
      fs.push_back(f[i]);
    }
    x = std::move(xs);
    f = std::move(fs);
  }

  double extent() const {
    double e = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) e = std::max(e, (x[i] - x[0]).lpNorm<Eigen::Infinity>());
    return e;
  }
};

}  // namespace

OptimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                           const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  auto eval = [&](const Eigen::VectorXd& x) { return finite_or_inf(f(x)); };
  OptimizeResult res;
  res.x = x0;
  res.f = eval(x0);
  if (n == 0 || res.f == 0.0) {
    res.converged = true;
    return res;
  }

  std::size_t restarts_left = opts.restarts;
  for (;;) {
    Simplex s;
    s.x.push_back(res.x);
    s.f.push_back(res.f);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd v = res.x;
      v[k] += opts.initial_step;
      s.x.push_back(v);
      s.f.push_back(eval(v));
    }
    s.sort();
    bool converged = false;
    const std::size_t window = opts.stall_window * static_cast<std::size_t>(n);
    double window_best = s.f[0];
    std::size_t window_start = res.iterations;
    while (res.iterations < opts.max_iter) {
      ++res.iterations;
      const std::size_t worst = s.x.size() - 1;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < worst; ++i) centroid += s.x[i];
      centroid /= static_cast<double>(worst);

      const Eigen::VectorXd xr = centroid + (centroid - s.x[worst]);
      const double fr = eval(xr);
      if (fr < s.f[0]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - s.x[worst]);
        const double fe = eval(xe);
        if (fe < fr) {
          s.x[worst] = xe;
          s.f[worst] = fe;
        } else {
          s.x[worst] = xr;
          s.f[worst] = fr;
        }
      } else if (fr < s.f[worst - 1]) {
        s.x[worst] = xr;
        s.f[worst] = fr;
      } else {
        const bool outside = fr < s.f[worst];
        const Eigen::VectorXd xc =
            outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (s.x[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : s.f[worst])) {
          s.x[worst] = xc;
          s.f[worst] = fc;
        } else {
          for (std::size_t i = 1; i < s.x.size(); ++i) {
            s.x[i] = s.x[0] + 0.5 * (s.x[i] - s.x[0]);
            s.f[i] = eval(s.x[i]);
          }
        }
      }
      s.sort();
      res.history.push_back(s.f[0]);
      const double spread = s.f.back() - s.f.front();
      if (s.f[0] == 0.0 || (spread <= opts.ftol * std::abs(s.f[0]) && s.extent() <= opts.xtol)) {
        converged = true;
        break;
      }
      if (res.iterations - window_start >= window) {
        if (window_best - s.f[0] <= opts.ftol * std::abs(s.f[0])) {
          converged = true;
          break;
        }
        window_best = s.f[0];
        window_start = res.iterations;
      }
    }
    const bool improved = s.f[0] < res.f;
    if (s.f[0] <= res.f) {
      res.x = s.x[0];
      res.f = s.f[0];
    }
    res.converged = converged;
    if (!converged || restarts_left == 0 || res.f == 0.0) break;
    // A restart that finds nothing better confirms the minimum.
    if (!improved && restarts_left < opts.restarts) break;
    --restarts_left;
  }
  return res;
}

OptimizeResult gradient_descent(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
                                const Eigen::VectorXd& x0, const GradientDescentOptions& opts) {
  OptimizeResult res;
  res.x = x0;
  Eigen::VectorXd g(x0.size()), g_trial(x0.size());
  res.f = finite_or_inf(fg(res.x, g));
  const double f_start = res.f;
  double step = opts.initial_step;
  while (res.iterations < opts.max_iter) {
    if (res.f == 0.0 || g.squaredNorm() == 0.0 || !g.allFinite()) {
      res.converged = res.f == 0.0 || g.squaredNorm() == 0.0;
      break;
    }
    ++res.iterations;
    const double g2 = g.squaredNorm();
    bool accepted = false;
    Eigen::VectorXd trial;
    double f_trial = 0.0;
    while (step > 1e-300) {
      trial = res.x - step * g;
      f_trial = finite_or_inf(fg(trial, g_trial));
      if (f_trial <= res.f - opts.armijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = true;  // no descent possible at machine precision
      res.history.push_back(res.f);
      break;
    }
    // Barzilai-Borwein trial step for the next iteration, still subject to backtracking
    const Eigen::VectorXd s = trial - res.x;
    const Eigen::VectorXd y = g_trial - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
    res.x = trial;
    res.f = f_trial;
    g = g_trial;
    res.history.push_back(res.f);
    const std::size_t n = res.history.size();
    const double reference = n > opts.window ? res.history[n - 1 - opts.window] : f_start;
    if (reference - res.f < opts.tol * std::abs(reference)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace netreduce
