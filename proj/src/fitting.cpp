#include "ralab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Dense>

namespace ralab {
namespace {

struct Points {
  std::vector<double> x, y;
};

// Sorting first makes every fit independent of input ordering.
Points sorted_points(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("x/y length mismatch");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  Points p;
  p.x.reserve(x.size());
  p.y.reserve(y.size());
  for (auto i : order) {
    p.x.push_back(x[i]);
    p.y.push_back(y[i]);
  }
  return p;
}

double median_of_sorted(const std::vector<double>& v) {
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Generic damped Gauss-Newton; model fills residuals r and Jacobian J for
// parameters theta. Returns iterations used, or -1 on non-convergence.
template <typename Model>
int damped_least_squares(Model&& model, Eigen::VectorXd& theta,
                         int max_iterations, double tol,
                         const std::function<bool(const Eigen::VectorXd&)>&
                             admissible) {
  int n_par = static_cast<int>(theta.size());
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  model(theta, r, j);
  double sse = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::VectorXd jtr = j.transpose() * r;
    bool accepted = false;
    Eigen::VectorXd delta(n_par);
    for (int inner = 0; inner < 30; ++inner) {
      Eigen::MatrixXd damped = jtj;
      for (int k = 0; k < n_par; ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      }
      delta = damped.ldlt().solve(-jtr);
      Eigen::VectorXd cand = theta + delta;
      if (admissible(cand)) {
        Eigen::VectorXd r2;
        Eigen::MatrixXd j2;
        model(cand, r2, j2);
        double sse2 = r2.squaredNorm();
        if (sse2 <= sse) {
          theta = cand;
          r = r2;
          j = j2;
          sse = sse2;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!accepted) return -1;
    double rel = 0.0;
    for (int k = 0; k < n_par; ++k) {
      rel = std::max(rel, std::abs(delta(k)) /
                              std::max(std::abs(theta(k)), 1e-12));
    }
    if (rel < tol) return iter;
  }
  return -1;
}

ScalingFit log_linear_fit(const Points& pts, bool log_x,
                          int points_excluded) {
  std::size_t n = pts.x.size();
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = log_x ? std::log(pts.x[i]) : pts.x[i];
    b(i) = std::log(pts.y[i]);
  }
  Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  ScalingFit fit;
  fit.a = std::exp(c(0));
  fit.b = log_x ? c(1) : -c(1);
  fit.points_used = static_cast<int>(n);
  fit.points_excluded = points_excluded;
  Eigen::VectorXd res = a * c - b;
  fit.rms_log_residual = std::sqrt(res.squaredNorm() / n);
  return fit;
}

Points filter_above(const Points& pts, double x_min, int* excluded) {
  Points out;
  for (std::size_t i = 0; i < pts.x.size(); ++i) {
    if (pts.x[i] > x_min) {
      out.x.push_back(pts.x[i]);
      out.y.push_back(pts.y[i]);
    }
  }
  *excluded = static_cast<int>(pts.x.size() - out.x.size());
  return out;
}

void require_positive(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0)) {
      throw InputError(std::string(what) + " values must be positive");
    }
  }
}

}  // namespace

SaturatingExpFit fit_saturating_exp(const std::vector<double>& t,
                                    const std::vector<double>& p,
                                    int max_iterations, double tol) {
  Points pts = sorted_points(t, p);
  if (pts.x.size() < 4) {
    throw InputError("saturation fit needs at least 4 points");
  }
  for (std::size_t i = 0; i < pts.x.size(); ++i) {
    if (!(pts.x[i] > 0.0)) throw InputError("times must be positive");
    if (pts.y[i] < -1e-9 || pts.y[i] > 1.0 + 1e-9) {
      throw InputError("probabilities must lie in [0, 1]");
    }
  }

  double mean = std::accumulate(pts.y.begin(), pts.y.end(), 0.0) /
                static_cast<double>(pts.y.size());
  double spread = 0.0;
  for (double v : pts.y) spread = std::max(spread, std::abs(v - mean));
  if (spread < 1e-12 * std::max(1.0, std::abs(mean))) {
    SaturatingExpFit flat;
    flat.f1 = mean;
    flat.f2 = 0.0;
    flat.f3 = 0.0;
    flat.converged = true;
    flat.f3_identifiable = false;
    return flat;
  }

  double f1 = *std::max_element(pts.y.begin(), pts.y.end());
  if (f1 <= 0.0) f1 = std::max(mean, 1e-6);
  double f2 = 1.0 - pts.y.front() / f1;
  double f3 = 1.0 / median_of_sorted(pts.x);
  Eigen::VectorXd theta(3);
  theta << f1, f2, f3;

  auto model = [&pts](const Eigen::VectorXd& th, Eigen::VectorXd& r,
                      Eigen::MatrixXd& j) {
    std::size_t n = pts.x.size();
    r.resize(n);
    j.resize(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::exp(-th(2) * pts.x[i]);
      r(i) = th(0) * (1.0 - th(1) * e) - pts.y[i];
      j(i, 0) = 1.0 - th(1) * e;
      j(i, 1) = -th(0) * e;
      j(i, 2) = th(0) * th(1) * pts.x[i] * e;
    }
  };
  auto admissible = [](const Eigen::VectorXd& th) { return th(2) > 0.0; };

  int iters = damped_least_squares(model, theta, max_iterations, tol,
                                   admissible);
  SaturatingExpFit fit;
  fit.f1 = theta(0);
  fit.f2 = theta(1);
  fit.f3 = theta(2);
  {
    Eigen::VectorXd r;
    Eigen::MatrixXd j;
    model(theta, r, j);
    fit.rms_residual =
        std::sqrt(r.squaredNorm() / static_cast<double>(pts.x.size()));
  }
  if (iters < 0) {
    fit.iterations = max_iterations;
    throw FitError("saturation fit did not converge", fit);
  }
  fit.iterations = iters;
  fit.converged = true;
  if (std::abs(fit.f2) < 1e-10) {
    fit.f3_identifiable = false;
    fit.f3 = 0.0;
    fit.f2 = 0.0;
  }
  return fit;
}

ScalingFit fit_exp_decay(const std::vector<double>& x,
                         const std::vector<double>& y, double x_min) {
  require_positive(y, "decay");
  Points all = sorted_points(x, y);
  int excluded = 0;
  Points pts = filter_above(all, x_min, &excluded);
  if (pts.x.size() < 2) {
    throw InputError("exponential-decay fit needs at least 2 points beyond "
                     "the cutoff");
  }
  return log_linear_fit(pts, /*log_x=*/false, excluded);
}

ScalingFit fit_power_law(const std::vector<double>& x,
                         const std::vector<double>& y) {
  require_positive(x, "abscissa");
  require_positive(y, "ordinate");
  Points pts = sorted_points(x, y);
  if (pts.x.size() < 2) {
    throw InputError("power-law fit needs at least 2 points");
  }
  return log_linear_fit(pts, /*log_x=*/true, 0);
}

ScalingFit fit_exp_decay_nonlinear(const std::vector<double>& x,
                                   const std::vector<double>& y,
                                   double x_min) {
  ScalingFit init = fit_exp_decay(x, y, x_min);
  Points all = sorted_points(x, y);
  int excluded = 0;
  Points pts = filter_above(all, x_min, &excluded);
  Eigen::VectorXd theta(2);
  theta << init.a, init.b;
  auto model = [&pts](const Eigen::VectorXd& th, Eigen::VectorXd& r,
                      Eigen::MatrixXd& j) {
    std::size_t n = pts.x.size();
    r.resize(n);
    j.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      double e = std::exp(-th(1) * pts.x[i]);
      r(i) = th(0) * e - pts.y[i];
      j(i, 0) = e;
      j(i, 1) = -th(0) * pts.x[i] * e;
    }
  };
  auto admissible = [](const Eigen::VectorXd& th) { return th(0) > 0.0; };
  damped_least_squares(model, theta, 200, 1e-10, admissible);
  ScalingFit fit = init;
  fit.a = theta(0);
  fit.b = theta(1);
  return fit;
}

ScalingFit fit_power_law_nonlinear(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  ScalingFit init = fit_power_law(x, y);
  Points pts = sorted_points(x, y);
  Eigen::VectorXd theta(2);
  theta << init.a, init.b;
  auto model = [&pts](const Eigen::VectorXd& th, Eigen::VectorXd& r,
                      Eigen::MatrixXd& j) {
    std::size_t n = pts.x.size();
    r.resize(n);
    j.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      double px = std::pow(pts.x[i], th(1));
      r(i) = th(0) * px - pts.y[i];
      j(i, 0) = px;
      j(i, 1) = th(0) * px * std::log(pts.x[i]);
    }
  };
  auto admissible = [](const Eigen::VectorXd& th) { return th(0) > 0.0; };
  damped_least_squares(model, theta, 200, 1e-10, admissible);
  ScalingFit fit = init;
  fit.a = theta(0);
  fit.b = theta(1);
  return fit;
}

}  // namespace ralab
