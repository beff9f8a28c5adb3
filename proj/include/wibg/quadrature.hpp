#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature for several integrands that
// share one evaluation (the Bogoliubov channels all reuse E_k and exp(-beta E_k)).
// Nodes and weights come from Boost.Math; the driver is QUADPACK-style QAG.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wibg/errors.hpp"

namespace wibg {

/// [a, b], or [a, +inf) when semi_infinite (integrated in u = a / k over (0, 1]; needs a > 0).
struct Panel {
  double a = 0.0;
  double b = 0.0;
  bool semi_infinite = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_intervals = 4000;
  bool throw_on_failure = true;
};

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  std::array<double, N> error{};
  int intervals = 0;
  bool converged = false;
};

/// Consecutive finite panels between sorted cut points.
inline std::vector<Panel> make_finite_panels(const std::vector<double>& cuts) {
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) panels.push_back({cuts[i], cuts[i + 1], false});
  return panels;
}

namespace detail {

template <class T>
struct channel_count;
template <std::size_t N>
struct channel_count<std::array<double, N>> : std::integral_constant<std::size_t, N> {};

template <std::size_t N>
struct Interval {
  double lo, hi;  // in the panel's integration variable
  std::size_t panel;
  std::array<double, N> value;
  std::array<double, N> error;
  bool splittable;
};

template <std::size_t N, class F>
void gauss_kronrod_21(F& f, const Panel& panel, Interval<N>& iv) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();

  const double center = 0.5 * (iv.lo + iv.hi);
  const double half = 0.5 * (iv.hi - iv.lo);

  auto eval = [&](double t) -> std::array<double, N> {
    if (!panel.semi_infinite) return f(t);
    // k = a / u, dk = a / u^2 du
    const double k = panel.a / t;
    auto v = f(k);
    const double jac = panel.a / (t * t);
    for (auto& c : v) c *= jac;
    return v;
  };

  std::array<std::array<double, N>, 21> fv;
  fv[0] = eval(center);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    fv[2 * i - 1] = eval(center - half * xk[i]);
    fv[2 * i] = eval(center + half * xk[i]);
  }

  for (std::size_t c = 0; c < N; ++c) {
    double kron = fv[0][c] * wk[0];
    double gauss = 0.0;
    double resabs = std::abs(fv[0][c]) * wk[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
      const double s = fv[2 * i - 1][c] + fv[2 * i][c];
      kron += s * wk[i];
      resabs += (std::abs(fv[2 * i - 1][c]) + std::abs(fv[2 * i][c])) * wk[i];
      if (i % 2 == 1) gauss += s * wg[i / 2];
    }
    const double mean = 0.5 * kron;
    double resasc = std::abs(fv[0][c] - mean) * wk[0];
    for (std::size_t i = 1; i < xk.size(); ++i)
      resasc += (std::abs(fv[2 * i - 1][c] - mean) + std::abs(fv[2 * i][c] - mean)) * wk[i];

    kron *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((kron - gauss * half));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
      err = std::max(50.0 * eps * resabs, err);
    iv.value[c] = kron;
    iv.error[c] = err;
  }
  const double scale = std::max(std::abs(iv.lo), std::abs(iv.hi));
  iv.splittable = half > 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

/// Integrates every channel of f over the union of panels. f: double -> std::array<double, N>.
/// Each channel must meet max(abs_tol, rel_tol * |I_c|).
template <class F>
auto integrate(F&& f, const std::vector<Panel>& panels, const QuadratureOptions& opts)
    -> QuadratureResult<detail::channel_count<std::decay_t<decltype(f(0.0))>>::value> {
  constexpr std::size_t N = detail::channel_count<std::decay_t<decltype(f(0.0))>>::value;
  using Iv = detail::Interval<N>;

  std::vector<Iv> intervals;
  intervals.reserve(64);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    Iv iv{};
    iv.panel = p;
    if (panels[p].semi_infinite) {
      iv.lo = 0.0;
      iv.hi = 1.0;
    } else {
      iv.lo = panels[p].a;
      iv.hi = panels[p].b;
    }
    detail::gauss_kronrod_21<N>(f, panels[p], iv);
    intervals.push_back(iv);
  }

  QuadratureResult<N> out;
  for (;;) {
    out.value.fill(0.0);
    out.error.fill(0.0);
    for (const auto& iv : intervals)
      for (std::size_t c = 0; c < N; ++c) {
        out.value[c] += iv.value[c];
        out.error[c] += iv.error[c];
      }
    std::array<double, N> tol;
    bool done = true;
    for (std::size_t c = 0; c < N; ++c) {
      tol[c] = std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value[c]));
      if (out.error[c] > tol[c]) done = false;
    }
    out.intervals = static_cast<int>(intervals.size());
    if (done) {
      out.converged = true;
      return out;
    }

    // Bisect the interval contributing most to the worst-offending channel.
    std::size_t worst = intervals.size();
    double worst_score = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (!intervals[i].splittable) continue;
      double score = 0.0;
      for (std::size_t c = 0; c < N; ++c) {
        const double t = tol[c] > 0.0 ? tol[c] : std::numeric_limits<double>::min();
        score = std::max(score, intervals[i].error[c] / t);
      }
      if (score > worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    if (worst == intervals.size() || static_cast<int>(intervals.size()) >= opts.max_intervals) break;

    Iv left = intervals[worst];
    Iv right = intervals[worst];
    const double mid = 0.5 * (left.lo + left.hi);
    left.hi = mid;
    right.lo = mid;
    detail::gauss_kronrod_21<N>(f, panels[left.panel], left);
    detail::gauss_kronrod_21<N>(f, panels[right.panel], right);
    intervals[worst] = left;
    intervals.push_back(right);
  }

  out.converged = false;
  if (opts.throw_on_failure) {
    std::ostringstream msg;
    msg << "quadrature did not converge after " << intervals.size() << " intervals; achieved";
    for (std::size_t c = 0; c < N; ++c) msg << " [" << out.value[c] << " +- " << out.error[c] << "]";
    msg << " requested rel_tol " << opts.rel_tol;
    throw NumericError(msg.str());
  }
  return out;
}

}  // namespace wibg
