#include "wibg/variational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"
#include "wibg/rates.hpp"

namespace wibg {

namespace {

// Stops once the bracket is a few ulps wide.
struct TightTolerance {
  double rel;
  bool operator()(double a, double b) const {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) ||
           std::abs(a - b) <= std::numeric_limits<double>::min();
  }
};

template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, double rel, const char* what) {
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, TightTolerance{rel}, iters);
  if (iters >= 200 && std::abs(r.second - r.first) > 1e-12 * std::max(1.0, std::abs(r.first))) {
    std::ostringstream msg;
    msg << what << ": root finder did not converge on bracket [" << r.first << ", " << r.second << "]";
    throw NumericError(msg.str());
  }
  return 0.5 * (r.first + r.second);
}

double depletion(double beta, double alpha, double x, const PotentialModel& model) {
  const auto b = bogoliubov_integrals({beta, alpha, x}, model, channel::depletion);
  return b.thermal_depletion + b.quantum_depletion;
}

}  // namespace

std::string_view to_string(Branch branch) {
  return branch == Branch::normal ? "normal" : "condensed";
}

InnerSolution inner_inf_alpha(double beta, double mu, double x, const PotentialModel& model) {
  check_point({beta, 0.0, x});
  const double l0 = model.lambda0();
  // h(alpha) = d/dalpha of the objective, strictly increasing.
  auto h = [&](double a) { return x + depletion(beta, a, x, model) - (mu - a) / l0; };

  InnerSolution out;
  const double dep0 = depletion(beta, 0.0, x, model);
  const double h0 = x + dep0 - mu / l0;
  if (h0 <= 0.0) {
    out.alpha = 0.0;
    out.saturated = true;
  } else {
    // depletion(alpha) <= dep0, so h(lo) <= 0 here.
    double lo = mu - l0 * (x + dep0);
    double hlo = h(lo);
    if (hlo > 0.0) {
      std::ostringstream msg;
      msg << "inner_inf_alpha: bracket [" << lo << ", 0] does not enclose the minimizer (h = " << hlo << ", "
          << h0 << ")";
      throw NumericError(msg.str());
    }
    out.alpha = hlo == 0.0 ? lo : bracketed_root(h, lo, 0.0, hlo, h0, 1e-15, "inner_inf_alpha");
  }
  const auto b = bogoliubov_integrals({beta, out.alpha, x}, model, channel::pressure | channel::depletion);
  out.depletion = b.thermal_depletion + b.quantum_depletion;
  const double shift = mu - out.alpha;
  out.value = out.alpha * x + b.thermal_pressure + b.vacuum_pressure + shift * shift / (2.0 * l0);
  return out;
}

double inner_slope(double beta, double, double x, const PotentialModel& model, const InnerSolution& inner) {
  return p0B_dx({beta, inner.alpha, x}, model);
}

SaddleSolution saddle_at(double beta, double mu, double x, const PotentialModel& model) {
  const auto inner = inner_inf_alpha(beta, mu, x, model);
  SaddleSolution s;
  s.mu = mu;
  s.alpha_star = inner.alpha;
  s.x_star = x;
  s.y_star = inner.depletion;
  s.pressure = inner.value;
  s.branch = x > 0.0 ? Branch::condensed : Branch::normal;
  s.saturated = inner.saturated;
  // x + y avoids the cancellation in mu - alpha when both are large and nearly equal
  s.rho = inner.saturated ? (mu - inner.alpha) / model.lambda0() : x + inner.depletion;
  s.stationarity = s.y_star + x + (inner.alpha - mu) / model.lambda0();
  return s;
}

namespace {

double slope_at(double beta, double mu, double x, const PotentialModel& model) {
  return inner_slope(beta, mu, x, model, inner_inf_alpha(beta, mu, x, model));
}

double refine_maximum(double beta, double mu, double lo, double hi, double slo, double shi,
                      const PotentialModel& model) {
  auto s = [&](double x) { return slope_at(beta, mu, x, model); };
  return bracketed_root(s, lo, hi, slo, shi, 1e-14, "condensed maximizer");
}

}  // namespace

std::vector<SaddleSolution> condensed_maxima(double beta, double mu, const PotentialModel& model,
                                             const OuterOptions& opts) {
  const double cap = x_cap(beta, mu, model);
  std::vector<SaddleSolution> out;
  if (!(cap > 0.0)) return out;

  std::vector<double> grid;
  const int n = std::max(opts.scan_points, 8);
  const int n_log = n / 5;
  const int n_lin = n - n_log;
  const double first_lin = cap / n_lin;
  for (int i = 0; i < n_log; ++i)
    grid.push_back(first_lin * std::pow(10.0, -6.0 + 6.0 * i / n_log));
  for (int i = 1; i <= n_lin; ++i) grid.push_back(cap * i / n_lin);

  std::vector<double> slopes(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) slopes[i] = slope_at(beta, mu, grid[i], model);
  if (slopes.back() > 0.0) {
    std::ostringstream msg;
    msg << "pressure still increasing at the superstability cap x = " << cap << " (mu = " << mu << ")";
    throw NumericError(msg.str());
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (slopes[i] > 0.0 && slopes[i + 1] <= 0.0) {
      const double x = slopes[i + 1] == 0.0
                           ? grid[i + 1]
                           : refine_maximum(beta, mu, grid[i], grid[i + 1], slopes[i], slopes[i + 1], model);
      out.push_back(saddle_at(beta, mu, x, model));
    }
  }
  return out;
}

std::optional<SaddleSolution> condensed_branch(double beta, double mu, const PotentialModel& model,
                                               std::optional<double> x_hint) {
  if (x_hint && *x_hint > 0.0) {
    const double cap = x_cap(beta, mu, model);
    double lo = *x_hint * 0.98;
    double hi = std::min(*x_hint * 1.02, cap);
    double slo = slope_at(beta, mu, lo, model);
    double shi = slope_at(beta, mu, hi, model);
    bool ok = true;
    while (ok && slo <= 0.0) {
      hi = lo;
      shi = slo;
      lo /= 1.25;
      if (lo < 0.05 * *x_hint) ok = false;
      else slo = slope_at(beta, mu, lo, model);
    }
    while (ok && shi > 0.0) {
      lo = hi;
      slo = shi;
      if (hi >= cap) ok = false;
      else {
        hi = std::min(hi * 1.25, cap);
        shi = slope_at(beta, mu, hi, model);
      }
    }
    if (ok) {
      const double x = shi == 0.0 ? hi : refine_maximum(beta, mu, lo, hi, slo, shi, model);
      return saddle_at(beta, mu, x, model);
    }
  }
  const auto all = condensed_maxima(beta, mu, model);
  if (all.empty()) return std::nullopt;
  auto best = all.begin();
  for (auto it = all.begin(); it != all.end(); ++it) {
    const bool better = x_hint ? std::abs(it->x_star - *x_hint) < std::abs(best->x_star - *x_hint)
                               : it->pressure > best->pressure;
    if (better) best = it;
  }
  return *best;
}

PressureResult pressure_sb(double beta, double mu, const PotentialModel& model, const OuterOptions& opts) {
  std::vector<SaddleSolution> candidates{saddle_at(beta, mu, 0.0, model)};
  for (auto& s : condensed_maxima(beta, mu, model, opts)) candidates.push_back(s);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : candidates) best = std::max(best, s.pressure);
  PressureResult out;
  out.pressure = best;
  for (const auto& s : candidates)
    if (best - s.pressure <= opts.tie_tolerance) out.maximizers.push_back(s);
  return out;
}

std::optional<PhaseTransition> find_transition(double beta, const PotentialModel& model,
                                               const TransitionScan& scan) {
  if (!(beta > 0.0)) throw DomainError("find_transition: beta must be positive");
  const int n = std::max(scan.mu_points, 2);
  auto mu_at = [&](int i) { return scan.mu_min + (scan.mu_max - scan.mu_min) * i / (n - 1); };

  std::optional<double> hint;
  int first_win = -1;
  bool branch_seen = false;
  for (int i = 0; i < n; ++i) {
    const double mu = mu_at(i);
    const auto cm = condensed_maxima(beta, mu, model);
    if (cm.empty()) continue;
    branch_seen = true;
    const auto best = *std::max_element(cm.begin(), cm.end(), [](const auto& a, const auto& b) {
      return a.pressure < b.pressure;
    });
    const double normal = inner_inf_alpha(beta, mu, 0.0, model).value;
    if (best.pressure >= normal) {
      first_win = i;
      hint = best.x_star;
      break;
    }
  }
  if (first_win < 0) {
    if (branch_seen) {
      std::ostringstream msg;
      msg << "condensed branch present but never dominant on mu in [" << scan.mu_min << ", " << scan.mu_max << "]";
      throw ScanRangeExhausted(msg.str());
    }
    return std::nullopt;
  }
  if (first_win == 0) {
    std::ostringstream msg;
    msg << "condensed branch already dominant at mu_min = " << scan.mu_min;
    throw ScanRangeExhausted(msg.str());
  }

  double lo = mu_at(first_win - 1);
  double hi = mu_at(first_win);
  // Delta p(mu) = condensed - normal, negative when the condensed branch is absent.
  auto delta = [&](double mu, std::optional<SaddleSolution>* cond) {
    auto c = condensed_branch(beta, mu, model, hint);
    if (cond) *cond = c;
    if (!c) return -std::numeric_limits<double>::infinity();
    hint = c->x_star;
    return c->pressure - inner_inf_alpha(beta, mu, 0.0, model).value;
  };
  std::optional<SaddleSolution> cond;
  double mid = 0.5 * (lo + hi);
  double dp = delta(mid, &cond);
  for (int it = 0; it < 200; ++it) {
    if (dp == 0.0 || hi - lo <= scan.mu_tolerance) break;
    if (dp > 0.0) hi = mid;
    else lo = mid;
    const double next = 0.5 * (lo + hi);
    if (next == mid) break;
    mid = next;
    dp = delta(mid, &cond);
  }
  if (!cond || !(std::abs(dp) <= scan.dp_tolerance)) {
    std::ostringstream msg;
    msg << "find_transition: branch pressures differ by " << dp << " at mu = " << mid << " after bisection";
    throw NumericError(msg.str());
  }

  const auto normal = saddle_at(beta, mid, 0.0, model);
  PhaseTransition t;
  t.beta = beta;
  t.mu_c = mid;
  t.rho_minus = normal.rho;
  t.rho_plus = cond->rho;
  t.x_plus = cond->x_star;
  t.y_plus = cond->y_star;
  t.alpha_minus = normal.alpha_star;
  t.alpha_plus = cond->alpha_star;
  t.pressure = std::max(normal.pressure, cond->pressure);
  t.delta_p = dp;
  return t;
}

double DensityResult::rho() const {
  if (branches.size() != 1)
    throw DomainError("density is two-valued at the transition; pick a branch explicitly");
  return branches.front().rho;
}

double DensityResult::rho(Branch pick) const {
  for (const auto& b : branches)
    if (b.branch == pick) return b.rho;
  throw DomainError(std::string("no ") + std::string(to_string(pick)) + " branch at this mu");
}

DensityResult density_of_mu(double beta, double mu, const PotentialModel& model) {
  return {pressure_sb(beta, mu, model).maximizers};
}

double branch_density(double beta, double mu, Branch branch, const PotentialModel& model,
                      std::optional<double> x_hint) {
  if (branch == Branch::normal) return (mu - inner_inf_alpha(beta, mu, 0.0, model).alpha) / model.lambda0();
  const auto c = condensed_branch(beta, mu, model, x_hint);
  if (!c) {
    std::ostringstream msg;
    msg << "no condensed branch at mu = " << mu;
    throw NumericError(msg.str());
  }
  return c->rho;
}

namespace {

// Bisection for a nondecreasing density function on [lo, hi] with rho(lo) <= target <= rho(hi).
template <class F>
double invert_density(F&& rho_of, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (rho_of(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double lower_mu_bracket(double target, const PotentialModel& model, const std::function<double(double)>& rho_of) {
  double step = 1.0;
  double lo = model.lambda0() * target - step;
  for (int it = 0; it < 200 && rho_of(lo) >= target; ++it) {
    step *= 2.0;
    lo = model.lambda0() * target - step;
  }
  if (rho_of(lo) >= target) throw NumericError("mu_of_rho: could not bracket mu from below");
  return lo;
}

}  // namespace

SaddleSolution condensed_saddle_of_rho(double beta, double rho, const PotentialModel& model,
                                       const PhaseTransition& t) {
  if (rho < t.rho_plus) throw DomainError("condensed_saddle_of_rho: rho must be >= rho_plus");
  if (rho == t.rho_plus) return saddle_at(beta, t.mu_c, t.x_plus, model);
  std::optional<double> hint = t.x_plus;
  auto rho_of = [&](double mu) {
    const auto c = condensed_branch(beta, mu, model, hint);
    if (!c) throw NumericError("condensed branch lost above mu_c");
    hint = c->x_star;
    return c->rho;
  };
  // alpha <= 0 gives mu <= lambda0 rho.
  const double mu = invert_density(rho_of, rho, t.mu_c, model.lambda0() * rho);
  const auto c = condensed_branch(beta, mu, model, hint);
  if (!c) throw NumericError("condensed branch lost above mu_c");
  return *c;
}

double mu_of_rho(double beta, double rho, const PotentialModel& model,
                 const std::optional<PhaseTransition>& transition) {
  if (!(rho > 0.0)) throw DomainError("mu_of_rho: rho must be positive");
  if (transition) {
    const auto& t = *transition;
    if (rho >= t.rho_minus && rho <= t.rho_plus) return t.mu_c;
    if (rho > t.rho_plus) return condensed_saddle_of_rho(beta, rho, model, t).mu;
    const std::function<double(double)> rho_of = [&](double mu) {
      return branch_density(beta, mu, Branch::normal, model);
    };
    return invert_density(rho_of, rho, lower_mu_bracket(rho, model, rho_of), t.mu_c);
  }
  const std::function<double(double)> rho_of = [&](double mu) {
    const auto d = density_of_mu(beta, mu, model);
    return d.branches.back().rho;
  };
  return invert_density(rho_of, rho, lower_mu_bracket(rho, model, rho_of), model.lambda0() * rho);
}

double condensate_of_rho(double beta, double rho, const PotentialModel& model,
                         const std::optional<PhaseTransition>& transition) {
  if (!(rho > 0.0)) throw DomainError("condensate_of_rho: rho must be positive");
  if (transition) {
    const auto& t = *transition;
    if (rho <= t.rho_minus) return 0.0;
    if (rho <= t.rho_plus) return (rho - t.rho_minus) / (t.rho_plus - t.rho_minus) * t.x_plus;
    return condensed_saddle_of_rho(beta, rho, model, t).x_star;
  }
  const double mu = mu_of_rho(beta, rho, model, std::nullopt);
  return density_of_mu(beta, mu, model).branches.back().x_star;
}

}  // namespace wibg
