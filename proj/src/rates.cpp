#include "wibg/rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"
#include "wibg/legendre.hpp"
#include "wibg/parallel.hpp"
#include "wibg/quadrature.hpp"

namespace wibg {

namespace {

constexpr double quarter_over_pi2 = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

// int_a^inf f(k) dk split at the model breakpoints.
template <class F>
double radial_tail(F&& f, double a, const PotentialModel& model) {
  std::vector<double> cuts{a};
  for (double b : model.breakpoints())
    if (b > a) cuts.push_back(b);
  if (cuts.back() <= 0.0) cuts.push_back(model.shape());
  std::sort(cuts.begin(), cuts.end());
  auto panels = make_finite_panels(cuts);
  panels.push_back({cuts.back(), 0.0, true});
  QuadratureOptions opts;
  opts.rel_tol = 1e-11;
  opts.abs_tol = 1e-250;
  auto g = [&](double k) { return std::array<double, 1>{f(k)}; };
  return integrate(g, panels, opts).value[0];
}

template <class F>
double radial_head(F&& f, double b, const PotentialModel& model) {
  if (!(b > 0.0)) return 0.0;
  std::vector<double> cuts{0.0};
  for (double c : model.breakpoints())
    if (c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  QuadratureOptions opts;
  opts.rel_tol = 1e-11;
  opts.abs_tol = 1e-250;
  auto g = [&](double k) { return std::array<double, 1>{f(k)}; };
  return integrate(g, make_finite_panels(cuts), opts).value[0];
}

// k^2 = x lambda(k); k^2 / lambda(k) is increasing for every family.
double crossover(double x, const PotentialModel& model) {
  if (!(x > 0.0)) return 0.0;
  double lo = 0.0;
  double hi = std::sqrt(x * model.lambda0());
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * mid - x * model(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return hi;
}

}  // namespace

double vacuum_slope_bound(double x, const PotentialModel& model) {
  if (!(x >= 0.0)) throw DomainError("vacuum_slope_bound: x must be >= 0");
  if (x == 0.0) return 0.0;
  const double kx = crossover(x, model);
  const double head = radial_head([&](double k) { return k * k * model(k); }, kx, model);
  const double tail = radial_tail([&](double k) { const double l = model(k); return l * l; }, kx, model);
  return quarter_over_pi2 * (head + x * tail);
}

double vacuum_slope_bound_derivative(double x, const PotentialModel& model) {
  if (!(x >= 0.0)) throw DomainError("vacuum_slope_bound_derivative: x must be >= 0");
  const double kx = crossover(x, model);
  return quarter_over_pi2 * radial_tail([&](double k) { const double l = model(k); return l * l; }, kx, model);
}

double x_cap(double beta, double mu, const PotentialModel& model) {
  if (!(beta > 0.0)) throw DomainError("x_cap: beta must be positive");
  const double l0 = model.lambda0();
  auto certified = [&](double x) {
    return mu - l0 * x + vacuum_slope_bound(x, model) < 0.0 && vacuum_slope_bound_derivative(x, model) < l0;
  };
  if (certified(0.0)) return 0.0;
  double hi = std::max(1e-6, std::abs(mu) / l0);
  double lo = 0.0;
  for (int it = 0; !certified(hi); ++it) {
    if (it > 200) throw NumericError("x_cap: superstability bound never becomes negative");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (certified(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

bool superstability_holds(double beta, double mu, const PotentialModel& model, double M, double B, int n) {
  const double l0 = model.lambda0();
  for (int i = 0; i < n; ++i) {
    const double x = M * (1.0 + 9.0 * i / (n - 1));
    for (int j = 0; j < n; ++j) {
      const double y = M * (1.0 + 9.0 * j / (n - 1));
      const double s = x + y;
      if (mu * s - f0B(beta, y, x, model) - 0.5 * l0 * s * s > -B * s) return false;
    }
  }
  return true;
}

SuperstabilityBound superstability_bound(double beta, double mu, const PotentialModel& model, double B) {
  if (!(B > 0.0)) throw DomainError("superstability_bound: B must be positive");
  double M = std::max(2.0 * (std::abs(mu) + B) / model.lambda0(), 1e-2);
  for (int it = 0; it < 60; ++it, M *= 2.0)
    if (superstability_holds(beta, mu, model, M, B)) return {M, B};
  std::ostringstream msg;
  msg << "superstability_bound: no M certifies B = " << B << " at mu = " << mu;
  throw NumericError(msg.str());
}

RateD::RateD(double beta, double rho, const PotentialModel& model, const std::optional<PhaseTransition>& transition)
    : beta_(beta), rho_(rho), mu_(0.0), x_rho_(0.0), reference_(0.0), model_(model) {
  if (!(rho > 0.0)) throw DomainError("rate_D: rho must be positive");
  if (transition) {
    const auto& t = *transition;
    if (rho > t.rho_plus) {
      const auto s = condensed_saddle_of_rho(beta, rho, model, t);
      mu_ = s.mu;
      x_rho_ = s.x_star;
      reference_ = s.pressure;
    } else {
      mu_ = rho >= t.rho_minus ? t.mu_c : mu_of_rho(beta, rho, model, transition);
      reference_ = inner_inf_alpha(beta, mu_, 0.0, model).value;
      if (rho >= t.rho_minus)
        reference_ = std::max(reference_, inner_inf_alpha(beta, mu_, t.x_plus, model).value);
    }
  } else {
    mu_ = mu_of_rho(beta, rho, model, std::nullopt);
    const auto d = density_of_mu(beta, mu_, model);
    x_rho_ = d.branches.back().x_star;
    reference_ = d.branches.back().pressure;
  }
}

double RateD::operator()(double x) const {
  return reference_ - inner_inf_alpha(beta_, mu_, x, model_).value;
}

RateK::RateK(double beta, double mu, const PotentialModel& model)
    : RateK(beta, mu, pressure_sb(beta, mu, model).pressure, model) {}

RateK::RateK(double beta, double mu, double pressure, const PotentialModel& model)
    : beta_(beta), mu_(mu), pressure_(pressure), model_(model) {}

double RateK::operator()(double x, double y) const {
  const double s = x + y;
  return pressure_ + f0B(beta_, y, x, model_) + 0.5 * model_.lambda0() * s * s - mu_ * s;
}

double RateK::min_over_y(double x, double y_max) const {
  auto k = [&](double y) { return (*this)(x, y); };
  std::uintmax_t iters = 500;
  const auto r = boost::math::tools::brent_find_minima(k, 0.0, y_max, std::numeric_limits<double>::digits, iters);
  return std::min(r.second, k(0.0));
}

double rate_D(double beta, double rho, double x, const PotentialModel& model,
              const std::optional<PhaseTransition>& transition) {
  return RateD(beta, rho, model, transition)(x);
}

double rate_K(double beta, double mu, double x, double y, const PotentialModel& model) {
  return RateK(beta, mu, model)(x, y);
}

RateWindow rate_window(double beta, double mu, const PotentialModel& model) {
  const double cap = x_cap(beta, mu, model);
  double y_max = 0.0;
  for (double f : {0.0, 0.25, 0.5, 1.0}) y_max = std::max(y_max, depletion_density({beta, 0.0, f * cap}, model));
  // saturated minimizers sit at x + y = mu / lambda0
  y_max = 1.25 * std::max(y_max, mu / model.lambda0());
  const double x_max = cap > 0.0 ? 1.25 * cap : 0.5 * y_max;
  return {x_max, y_max};
}

namespace {

std::vector<double> uniform_axis(double hi, int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = hi * i / (n - 1);
  return a;
}

// Brent search for min over [lo, hi] of f, also comparing the endpoint lo when it is 0.
template <class F>
std::pair<double, double> polish(F&& f, double lo, double hi) {
  std::uintmax_t iters = 500;
  auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits, iters);
  if (lo == 0.0) {
    const double f0 = f(0.0);
    if (f0 <= r.second) r = {0.0, f0};
  }
  return r;
}

void dedupe(std::vector<Minimizer>& ms, double dx, double dy) {
  std::sort(ms.begin(), ms.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  std::vector<Minimizer> kept;
  for (const auto& m : ms) {
    bool near = false;
    for (const auto& k : kept)
      if (std::abs(m.x - k.x) <= dx && std::abs(m.y - k.y) <= dy) near = true;
    if (!near) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  ms = kept;
}

}  // namespace

RateGrid tabulate_K(const RateK& rate, const RateWindow& window, int nx, int ny, double zero_tol) {
  if (nx < 3 || ny < 3) throw DomainError("tabulate_K: grids need at least 3 points per axis");
  RateGrid g;
  g.xs = uniform_axis(window.x_max, nx);
  g.ys = uniform_axis(window.y_max, ny);
  g.values.resize(g.xs.size() * g.ys.size());
  const double l0 = rate.model().lambda0();
  parallel_for(g.xs.size(), [&](std::size_t i) {
    const double x = g.xs[i];
    const auto col = f0B_column(rate.beta(), x, g.ys, rate.model());
    for (std::size_t j = 0; j < g.ys.size(); ++j) {
      const double s = x + g.ys[j];
      g.values[i * g.ys.size() + j] = rate.pressure() + col[j].value + 0.5 * l0 * s * s - rate.mu() * s;
    }
  });

  const double hx = g.xs[1] - g.xs[0];
  const double hy = g.ys[1] - g.ys[0];
  std::vector<Minimizer> found;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double v = g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      bool local = true;
      for (int di = -1; di <= 1 && local; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di;
          const int b = j + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= nx || b >= ny) continue;
          if (g.at(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) < v) {
            local = false;
            break;
          }
        }
      if (!local) continue;
      // K is strictly convex in y, so min over y is exact; polish x within the neighboring cells.
      const double lo = std::max(0.0, g.xs[static_cast<std::size_t>(i)] - hx);
      const double hi = std::min(window.x_max, g.xs[static_cast<std::size_t>(i)] + hx);
      auto m = [&](double x) { return rate.min_over_y(x, window.y_max); };
      const auto [xm, vm] = polish(m, lo, hi);
      if (vm > zero_tol) continue;
      auto ky = [&](double y) { return rate(xm, y); };
      const auto [ym, vy] = polish(ky, 0.0, window.y_max);
      found.push_back({xm, ym, std::min(vm, vy)});
    }
  dedupe(found, 2.0 * hx, 2.0 * hy);
  g.minimizers = found;
  return g;
}

RateGrid tabulate_D(const RateD& rate, double x_max, int nx, double zero_tol) {
  if (nx < 3) throw DomainError("tabulate_D: grids need at least 3 points");
  RateGrid g;
  g.xs = uniform_axis(x_max, nx);
  g.values.resize(g.xs.size());
  parallel_for(g.xs.size(), [&](std::size_t i) { g.values[i] = rate(g.xs[i]); });
  const double hx = g.xs[1] - g.xs[0];
  std::vector<Minimizer> found;
  for (int i = 0; i < nx; ++i) {
    const double v = g.values[static_cast<std::size_t>(i)];
    const bool left = i == 0 || g.values[static_cast<std::size_t>(i - 1)] >= v;
    const bool right = i == nx - 1 || g.values[static_cast<std::size_t>(i + 1)] >= v;
    if (!left || !right) continue;
    const double lo = std::max(0.0, g.xs[static_cast<std::size_t>(i)] - hx);
    const double hi = std::min(x_max, g.xs[static_cast<std::size_t>(i)] + hx);
    auto [xm, vm] = polish(rate, lo, hi);
    if (std::abs(rate.x_rho() - g.xs[static_cast<std::size_t>(i)]) <= hx) {
      const double at_ref = rate(rate.x_rho());
      if (at_ref <= vm) {
        xm = rate.x_rho();
        vm = at_ref;
      }
    }
    if (vm <= zero_tol) found.push_back({xm, 0.0, vm});
  }
  dedupe(found, 2.0 * hx, 1.0);
  g.minimizers = found;
  return g;
}

}  // namespace wibg
