#include "wibg/legendre.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"

namespace wibg {

namespace {

struct Key {
  double beta, y, x, lambda0, shape;
  PotentialFamily family;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::size_t h = std::hash<int>{}(static_cast<int>(k.family));
    for (double v : {k.beta, k.y, k.x, k.lambda0, k.shape})
      h ^= std::hash<double>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

std::atomic<bool> cache_enabled{true};
std::mutex cache_mutex;
std::unordered_map<Key, ConjugateValue, KeyHash> cache;
constexpr std::size_t cache_limit = 1u << 21;

double depletion(double beta, double alpha, double x, const PotentialModel& model) {
  const auto b = bogoliubov_integrals({beta, alpha, x}, model, channel::depletion);
  return b.thermal_depletion + b.quantum_depletion;
}

struct RelTol {
  bool operator()(double a, double b) const {
    return std::abs(a - b) <= 1e-15 * std::max(std::abs(a), std::abs(b));
  }
};

// Root of depletion(alpha, x) = y on [lo, hi] with depletion(lo) < y < depletion(hi).
double alpha_for_depletion(double beta, double y, double x, const PotentialModel& model, double lo, double dlo,
                           double hi, double dhi) {
  auto f = [&](double a) { return depletion(beta, a, x, model) - y; };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, dlo - y, dhi - y, RelTol{}, iters);
  if (iters >= 200 && std::abs(r.second - r.first) > 1e-12 * std::max(1.0, std::abs(r.first))) {
    std::ostringstream msg;
    msg << "f0B: maximizer search did not converge on [" << r.first << ", " << r.second << "]";
    throw NumericError(msg.str());
  }
  return 0.5 * (r.first + r.second);
}

ConjugateValue at_alpha(double beta, double y, double x, double alpha, const PotentialModel& model) {
  const auto b = bogoliubov_integrals({beta, alpha, x}, model, channel::pressure);
  // alpha (y + x) - p0B with the alpha x terms cancelled analytically.
  return {alpha * y - b.thermal_pressure - b.vacuum_pressure, alpha, alpha == 0.0};
}

void check_args(double beta, double y, double x) {
  if (!(beta > 0.0)) throw DomainError("f0B: beta must be positive");
  if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("f0B: y must be >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("f0B: x must be >= 0");
}

ConjugateValue compute_f0B(double beta, double y, double x, const PotentialModel& model) {
  if (y == 0.0) return {0.0, -std::numeric_limits<double>::infinity(), false};
  const double dep0 = depletion(beta, 0.0, x, model);
  if (y >= dep0) return at_alpha(beta, y, x, 0.0, model);
  double lo = -1.0;
  double dlo = depletion(beta, lo, x, model);
  double hi = 0.0;
  double dhi = dep0;
  for (int it = 0; dlo >= y; ++it) {
    if (it > 2000) throw NumericError("f0B: could not bracket the maximizing alpha");
    hi = lo;
    dhi = dlo;
    lo *= 2.0;
    dlo = depletion(beta, lo, x, model);
  }
  return at_alpha(beta, y, x, alpha_for_depletion(beta, y, x, model, lo, dlo, hi, dhi), model);
}

}  // namespace

void set_conjugate_cache(bool enabled) { cache_enabled = enabled; }

void clear_conjugate_cache() {
  std::lock_guard lock(cache_mutex);
  cache.clear();
}

ConjugateValue f0B_detail(double beta, double y, double x, const PotentialModel& model) {
  check_args(beta, y, x);
  const Key key{beta, y, x, model.lambda0(), model.shape(), model.family()};
  if (cache_enabled) {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto v = compute_f0B(beta, y, x, model);
  if (cache_enabled) {
    std::lock_guard lock(cache_mutex);
    if (cache.size() >= cache_limit) cache.clear();
    cache.emplace(key, v);
  }
  return v;
}

double f0B(double beta, double y, double x, const PotentialModel& model) {
  return f0B_detail(beta, y, x, model).value;
}

double fSB(double beta, double y, double x, const PotentialModel& model) {
  const double s = y + x;
  return f0B(beta, y, x, model) + 0.5 * model.lambda0() * s * s;
}

FreeEnergyPoint free_energy_point(double beta, double y, double x, const PotentialModel& model) {
  const double f = f0B(beta, y, x, model);
  const double s = y + x;
  return {y, x, f, f + 0.5 * model.lambda0() * s * s};
}

std::vector<ConjugateValue> f0B_column(double beta, double x, const std::vector<double>& ys,
                                       const PotentialModel& model) {
  std::vector<ConjugateValue> out(ys.size());
  if (ys.empty()) return out;
  check_args(beta, ys.front(), x);
  if (!std::is_sorted(ys.begin(), ys.end())) throw DomainError("f0B_column: ys must be ascending");
  const double dep0 = depletion(beta, 0.0, x, model);
  double lo = -1.0;
  double dlo = depletion(beta, lo, x, model);
  bool lo_valid = false;  // whether dlo < next y is known to hold
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    if (y == 0.0) {
      out[i] = {0.0, -std::numeric_limits<double>::infinity(), false};
      continue;
    }
    if (y >= dep0) {
      out[i] = at_alpha(beta, y, x, 0.0, model);
      continue;
    }
    if (!lo_valid || dlo >= y) {
      lo = std::min(lo, -1.0);
      dlo = depletion(beta, lo, x, model);
      for (int it = 0; dlo >= y; ++it) {
        if (it > 2000) throw NumericError("f0B: could not bracket the maximizing alpha");
        lo *= 2.0;
        dlo = depletion(beta, lo, x, model);
      }
    }
    const double a = alpha_for_depletion(beta, y, x, model, lo, dlo, 0.0, dep0);
    out[i] = at_alpha(beta, y, x, a, model);
    lo = a;
    dlo = y;
    lo_valid = true;
  }
  return out;
}

double double_conjugate(double beta, double alpha, double x, const PotentialModel& model, double y_max) {
  auto neg = [&](double y) { return -(alpha * (y + x) - f0B(beta, y, x, model)); };
  std::uintmax_t iters = 500;
  const auto r = boost::math::tools::brent_find_minima(neg, 0.0, y_max, std::numeric_limits<double>::digits, iters);
  return std::max(-r.second, -neg(0.0));
}

PsiSaddle saddle_psi(double beta, double mu, double x, const PotentialModel& model) {
  if (!(x >= 0.0)) throw DomainError("saddle_psi: x must be >= 0");
  const double l0 = model.lambda0();
  auto alpha_inner = [&](double y) { return std::min(0.0, mu - l0 * (y + x)); };
  // sup_y of inf_alpha Psi; the inner infimum is attained at alpha_inner(y).
  auto psi_inf = [&](double y) {
    const double a = alpha_inner(y);
    return a * (y + x) + (mu - a) * (mu - a) / (2.0 * l0) - f0B(beta, y, x, model);
  };

  const double dep0 = depletion(beta, 0.0, x, model);
  PsiSaddle out;
  // r(y) = alpha_inner(y) - argmax alpha of f0B(y), strictly decreasing.
  auto r = [&](double y) { return alpha_inner(y) - f0B_detail(beta, y, x, model).alpha; };
  const double r_hi = r(dep0);
  if (r_hi >= 0.0) {
    out.y = dep0;
  } else {
    double lo = std::min(dep0, 1.0) * 0.5;
    double r_lo = r(lo);
    for (int it = 0; r_lo <= 0.0; ++it) {
      if (it > 2000) throw NumericError("saddle_psi: could not bracket the stationary y");
      lo *= 0.5;
      r_lo = r(lo);
    }
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(r, lo, dep0, r_lo, r_hi, RelTol{}, iters);
    out.y = 0.5 * (root.first + root.second);
  }
  out.alpha = f0B_detail(beta, out.y, x, model).alpha;
  out.sup_inf = psi_inf(out.y);
  out.stationarity = out.y + x + (out.alpha - mu) / l0;

  // inf_alpha sup_y Psi, with sup_y restoring p0B; the maximizing y never exceeds dep0.
  const double y_max = 2.0 * dep0 + 1e-12;
  auto outer = [&](double a) {
    return double_conjugate(beta, a, x, model, y_max) + (mu - a) * (mu - a) / (2.0 * l0);
  };
  const double a_lo = std::min(mu, 0.0) - l0 * (x + dep0) - 1.0;
  std::uintmax_t iters = 500;
  const auto m = boost::math::tools::brent_find_minima(outer, a_lo, 0.0, std::numeric_limits<double>::digits, iters);
  out.inf_sup = std::min(m.second, outer(0.0));
  return out;
}

}  // namespace wibg
