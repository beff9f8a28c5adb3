// Acceptance runner: `acceptance <n>` or `acceptance all`. One PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "wibg/bog_pressure.hpp"
#include "wibg/finite_volume.hpp"
#include "wibg/kac_mixture.hpp"
#include "wibg/legendre.hpp"
#include "wibg/parallel.hpp"
#include "wibg/rates.hpp"
#include "wibg/variational.hpp"

using namespace wibg;
using namespace wibg::testing;

namespace {

constexpr double B = fixture_beta;

class Report {
public:
  /// Records |measured| against tol (measured <= tol passes).
  void le(const std::string& what, double measured, double tol) {
    const bool ok = measured <= tol;
    std::printf("    %-58s %-4s %.3e (tol %.1e)\n", what.c_str(), ok ? "ok" : "FAIL", measured, tol);
    pass_ = pass_ && ok;
  }
  void ge(const std::string& what, double measured, double bound) {
    const bool ok = measured >= bound;
    std::printf("    %-58s %-4s %.6g (need >= %.6g)\n", what.c_str(), ok ? "ok" : "FAIL", measured, bound);
    pass_ = pass_ && ok;
  }
  void check(const std::string& what, bool ok, const std::string& detail = {}) {
    std::printf("    %-58s %-4s %s\n", what.c_str(), ok ? "ok" : "FAIL", detail.c_str());
    pass_ = pass_ && ok;
  }
  void note(const std::string& text) { std::printf("    %s\n", text.c_str()); }
  bool pass() const { return pass_; }

private:
  bool pass_ = true;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void ideal_gas_reduction(Report& r) {
  const auto m = fixture_model();
  double worst = 0.0;
  for (double beta : linspace(0.5, 4.0, 5))
    for (double alpha : linspace(-4.0, -0.1, 5)) {
      const double oracle = ideal_pressure(beta, alpha);
      worst = std::max(worst, std::abs(p0B({beta, alpha, 0.0}, m) - oracle) / oracle);
    }
  r.le("max relative error vs polylog series (25 points)", worst, 1e-8);
}

void convexity_and_derivative(Report& r) {
  const auto m = fixture_model();
  double convexity = 0.0;
  double slope_fd = 0.0;
  double slope_analytic = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double beta = uniform(0.5, 4.0);
    const double x = uniform(0.0, 0.5);
    const double a1 = uniform(-4.0, -0.01);
    const double a2 = uniform(-4.0, -0.01);
    const double mid = p0B({beta, 0.5 * (a1 + a2), x}, m);
    const double chord = 0.5 * (p0B({beta, a1, x}, m) + p0B({beta, a2, x}, m));
    convexity = std::max(convexity, mid - chord);

    const double a = a1;
    const double h = 1e-5 * std::max(1.0, std::abs(a));
    const double fd = (p0B({beta, a + h, x}, m) - p0B({beta, a - h, x}, m)) / (2 * h);
    const double target = x + depletion_density({beta, a, x}, m);
    slope_fd = std::max(slope_fd, std::abs(fd - target));
    slope_analytic = std::max(slope_analytic, std::abs(p0B_dalpha({beta, a, x}, m) - target));
  }
  r.le("midpoint convexity violation (50 random points)", std::max(convexity, 0.0), 1e-9);
  r.le("|central difference in alpha - (x + depletion)|", slope_fd, 1e-6);
  r.le("|analytic d/dalpha - (x + depletion)|", slope_analytic, 1e-6);
}

void legendre_duality(Report& r) {
  const auto m = fixture_model();
  double restore = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = uniform(-4.0, -0.05);
    const double x = uniform(0.0, 0.4);
    const double y_max = 4.0 * depletion_density({B, 0.0, x}, m) + 0.1;
    restore = std::max(restore, std::abs(double_conjugate(B, a, x, m, y_max) - p0B({B, a, x}, m)));
  }
  r.le("double conjugate vs p0B (20 random points)", restore, 1e-6);

  double fy_violation = 0.0;
  double fy_equality = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = uniform(-4.0, -0.01);
    const double x = uniform(0.0, 0.4);
    const double y = uniform(0.0, 0.3);
    fy_violation = std::max(fy_violation, a * (y + x) - p0B({B, a, x}, m) - f0B(B, y, x, m));
    const double yd = depletion_density({B, a, x}, m);
    fy_equality = std::max(fy_equality, std::abs(a * (yd + x) - p0B({B, a, x}, m) - f0B(B, yd, x, m)));
  }
  r.le("Fenchel-Young inequality violation (100 random points)", std::max(fy_violation, 0.0), 1e-9);
  r.le("Fenchel-Young equality at conjugate pairs", fy_equality, 1e-9);

  double minimax = 0.0;
  for (double mu : {-1.0, 0.5, 3.0, 4.8, 7.0})
    for (double x : {0.0, 0.05, 0.17, 0.3}) {
      const auto s = saddle_psi(B, mu, x, m);
      minimax = std::max(minimax, std::abs(s.sup_inf - s.inf_sup));
    }
  r.le("|sup inf Psi - inf sup Psi| (20 points)", minimax, 1e-6);
}

void transition_structure(Report& r) {
  const auto m = fixture_model();
  const auto found = find_transition(B, m);
  r.check("transition found at the fixture", found.has_value());
  if (!found) return;
  const auto& t = *found;
  r.note(fmt("mu_c = %.15g", t.mu_c) + fmt(", rho- = %.15g", t.rho_minus) + fmt(", rho+ = %.15g", t.rho_plus));
  r.check("rho+ > rho-", t.rho_plus > t.rho_minus);
  const double pn = saddle_at(B, t.mu_c, 0.0, m).pressure;
  const double pc = saddle_at(B, t.mu_c, t.x_plus, m).pressure;
  r.le("|branch pressure difference| at mu_c", std::abs(pc - pn), 1e-10);

  // one-sided second-order differences of p^SB
  const double h = 1e-4;
  const double p0 = pressure_sb(B, t.mu_c, m).pressure;
  const double right = (-3 * p0 + 4 * pressure_sb(B, t.mu_c + h, m).pressure -
                        pressure_sb(B, t.mu_c + 2 * h, m).pressure) / (2 * h);
  const double left = (3 * p0 - 4 * pressure_sb(B, t.mu_c - h, m).pressure +
                       pressure_sb(B, t.mu_c - 2 * h, m).pressure) / (2 * h);
  r.note(fmt("dp/dmu left = %.10g", left) + fmt(", right = %.10g", right));
  r.le("|dp/dmu jump - (rho+ - rho-)|", std::abs((right - left) - (t.rho_plus - t.rho_minus)), 1e-4);
  r.le("|mu_c - frozen oracle| / mu_c", std::abs(t.mu_c - frozen_mu_c) / frozen_mu_c, 1e-10);
  r.le("|rho- - frozen oracle|", std::abs(t.rho_minus - frozen_rho_minus), 1e-8);
  r.le("|rho+ - frozen oracle|", std::abs(t.rho_plus - frozen_rho_plus), 1e-7);
  r.le("|x+ - frozen oracle|", std::abs(t.x_plus - frozen_x_plus), 1e-7);
}

void maxwell_plateau(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  const auto rhos = linspace(0.5 * t.rho_minus, 2.0 * t.rho_plus, 200);
  std::vector<double> mus(rhos.size());
  std::vector<double> xs(rhos.size());
  parallel_for(rhos.size(), [&](std::size_t i) {
    mus[i] = mu_of_rho(B, rhos[i], m, t);
    xs[i] = condensate_of_rho(B, rhos[i], m, t);
  });

  double decrease = 0.0;
  double plateau = 0.0;
  double below = 0.0;
  double linear = 0.0;
  double lipschitz = 0.0;
  bool ratio_increasing = true;
  int on_plateau = 0;
  int above = 0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (i > 0) {
      decrease = std::max(decrease, mus[i - 1] - mus[i]);
      lipschitz = std::max(lipschitz, std::abs(xs[i] - xs[i - 1]) / (rhos[i] - rhos[i - 1]));
    }
    if (rhos[i] < t.rho_minus) below = std::max(below, std::abs(xs[i]));
    if (rhos[i] >= t.rho_minus && rhos[i] <= t.rho_plus) {
      ++on_plateau;
      plateau = std::max(plateau, std::abs(mus[i] - t.mu_c));
      linear = std::max(linear, std::abs(xs[i] - kappa(rhos[i], t) * t.x_plus));
    }
    if (rhos[i] > t.rho_plus) {
      if (above > 0 && !(xs[i] / rhos[i] > xs[i - 1] / rhos[i - 1])) ratio_increasing = false;
      ++above;
    }
  }
  r.note(fmt("grid points: %g on the plateau, ", on_plateau) + fmt("%g above it", above));
  r.le("largest decrease of mu along the grid", std::max(decrease, 0.0), 0.0);
  r.le("|mu - mu_c| on the plateau", plateau, 1e-8);
  r.le("|x| below rho-", below, 0.0);
  r.le("|x - kappa x+| on the plateau", linear, 1e-6);
  r.check("x / rho strictly increasing above rho+", ratio_increasing);

  // continuity at both plateau ends and a finite slope across the grid
  const double d = 1e-7;
  r.le("|x(rho+ + 1e-7) - x+|", std::abs(condensate_of_rho(B, t.rho_plus + d, m, t) - t.x_plus), 1e-5);
  r.le("x(rho- + 1e-7)", condensate_of_rho(B, t.rho_minus + d, m, t), 1e-5);
  r.le("max |dx / drho| between grid neighbours", lipschitz, 10.0);
}

void rate_suite(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  double k_min = 0.0;
  for (double mu : {t.mu_c - 1.0, t.mu_c - 0.1, t.mu_c + 0.1, t.mu_c + 1.0}) {
    const auto g = tabulate_K(RateK(B, mu, m), rate_window(B, mu, m), 64, 64);
    for (double v : g.values) k_min = std::min(k_min, v);
    r.check(fmt("K zeros at mu = mu_c %+.1f", mu - t.mu_c), g.minimizers.size() == 1,
            fmt("%g found", static_cast<double>(g.minimizers.size())));
  }
  const auto gc = tabulate_K(RateK(B, t.mu_c, m), rate_window(B, t.mu_c, m), 64, 64);
  for (double v : gc.values) k_min = std::min(k_min, v);
  r.check("K zeros at mu_c", gc.minimizers.size() == 2, fmt("%g found", static_cast<double>(gc.minimizers.size())));

  double d_min = 0.0;
  double contraction = 0.0;
  for (double rho : {0.5 * t.rho_minus, 0.5 * (t.rho_minus + t.rho_plus), 1.5 * t.rho_plus}) {
    const RateD d(B, rho, m, t);
    const auto w = rate_window(B, d.mu(), m);
    const auto g = tabulate_D(d, w.x_max, 128);
    for (double v : g.values) d_min = std::min(d_min, v);
    const RateK k(B, d.mu(), m);
    for (int i = 0; i <= 10; ++i) {
      const double x = w.x_max * i / 10.0;
      contraction = std::max(contraction, std::abs(k.min_over_y(x, w.y_max) - d(x)));
    }
  }
  r.ge("min K over 5 grids of 64 x 64", k_min, -1e-9);
  r.ge("min D over 3 grids of 128", d_min, -1e-9);
  r.le("|min_y K - D| (33 points)", contraction, 1e-6);
}

void mixture_identities(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  double xi_err = 0.0;
  double round_trip = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double rho = t.rho_minus + (t.rho_plus - t.rho_minus) * i / 101.0;
    const double g = gamma_of_rho(rho, t);
    xi_err = std::max(xi_err, std::abs(xi(g, t) - (1.0 - kappa(rho, t))));
    round_trip = std::max(round_trip, std::abs(mixture_density(g, t) - rho));
  }
  r.le("|xi(gamma_rho) - (1 - kappa)| (100 plateau points)", xi_err, 1e-12);
  r.le("|mixture_density(gamma_of_rho(rho)) - rho|", round_trip, 1e-12);

  double mean_x = 0.0;
  for (double rho : linspace(0.5 * t.rho_minus, 1.5 * t.rho_plus, 12)) {
    const double lhs = limit_measure(B, rho, m, t).mean_x();
    mean_x = std::max(mean_x, std::abs(lhs - condensate_of_rho(B, rho, m, t)));
  }
  r.le("|mean x under the limit law - condensate_of_rho|", mean_x, 1e-12);
}

void lattice_convergence(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  struct Point {
    double alpha, x;
  };
  for (const Point pt : {Point{t.alpha_plus, t.x_plus}, Point{-0.5, 0.0}, Point{-1.0, 0.3}}) {
    const double exact = p0B({B, pt.alpha, pt.x}, m);
    std::vector<double> err;
    for (double L : {8.0, 16.0, 32.0, 64.0}) err.push_back(std::abs(lattice_p0B(B, pt.alpha, pt.x, m, {L, 0.0}) - exact));
    const std::string at = fmt("(alpha %.4g, ", pt.alpha) + fmt("x %.4g)", pt.x);
    r.note(at + fmt(": errors %.3e", err[0]) + fmt(" %.3e", err[1]) + fmt(" %.3e", err[2]) + fmt(" %.3e", err[3]));
    r.le("error at L = 64 " + at, err[3], 1e-3);
    double ratio = 1e300;
    for (std::size_t i = 1; i < err.size(); ++i) ratio = std::min(ratio, err[i - 1] / err[i]);
    r.ge("smallest error ratio per doubling " + at, ratio, 1.5);
  }
}

void ld_concentration(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  const double mu = t.mu_c - 0.1;
  const RateK k(B, mu, m);
  GridSpec spec;
  spec.nx = 256;
  spec.ny = 256;
  spec.volumes = {1e5};
  auto wg = laplace_weight_grid(peak_adapted_field(k, spec), 1e5, 0.0);
  const auto masses = basin_masses(wg, t);
  r.ge("basin mass at the minimizer, mu = mu_c - 0.1, V = 1e5", masses.normal, 0.99);

  const Rect away{0.1, 0.3, 0.0, 0.1};
  const auto ld = ld_convergence_check(B, mu, {1e3, 1e4, 1e5}, away, m, 256);
  for (const auto& row : ld.rows)
    r.note(fmt("V = %.0e: (1/beta V) ln mass = ", row.volume) + fmt("%.6g", row.scaled_log_mass) +
           fmt("  (target %.6g)", ld.target));
  r.le("|(1/beta V) ln mass(rect) + min K| at V = 1e5", std::abs(ld.rows.back().scaled_log_mass - ld.target), 0.05);
}

void quasi_average(Report& r) {
  const auto m = fixture_model();
  const auto& t = fixture_transition();
  const std::vector<double> volumes{1e2, 1e3, 1e4, 1e5};
  GridSpec spec;
  spec.nx = 256;
  spec.ny = 256;
  spec.volumes = volumes;
  const auto field = peak_adapted_field(RateK(B, t.mu_c, m), spec);

  for (double kap : {0.25, 0.5, 0.75}) {
    const double rho = t.rho_minus + kap * (t.rho_plus - t.rho_minus);
    const double g = gamma_of_rho(rho, t);
    std::vector<double> err;
    std::string row = fmt("kappa = %.2f: condensed mass", kap);
    for (double V : volumes) {
      auto wg = laplace_weight_grid(field, V, g);
      const double c = basin_masses(wg, t).condensed;
      row += fmt(" %.4f", c);
      err.push_back(std::abs(c - kap));
    }
    r.note(row);
    r.le(fmt("|condensed mass - kappa| at V = 1e5, kappa = %.2f", kap), err.back(), 0.05);
    bool monotone = true;
    for (std::size_t i = 1; i < err.size(); ++i) monotone = monotone && err[i] <= err[i - 1];
    r.check(fmt("error decreases along the V sweep, kappa = %.2f", kap), monotone);
  }

  auto w0 = laplace_weight_grid(field, 1e5, 0.0);
  const auto b0 = basin_masses(w0, t);
  r.note(fmt("gamma = 0, V = 1e5: normal %.6f", b0.normal) + fmt(", condensed %.6f", b0.condensed) +
         fmt(", theta %.4g", b0.condensed / b0.normal));
  r.le("|masses - (1/2, 1/2)| at gamma = 0, V = 1e5",
       std::max(std::abs(b0.normal - 0.5), std::abs(b0.condensed - 0.5)), 1e-3);
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<void(Report&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"ideal-gas reduction", 10, ideal_gas_reduction},
      {"convexity and derivative consistency", 30, convexity_and_derivative},
      {"Legendre duality", 60, legendre_duality},
      {"transition structure", 120, transition_structure},
      {"Maxwell plateau", 300, maxwell_plateau},
      {"rate-function suite", 180, rate_suite},
      {"mixture identities", 5, mixture_identities},
      {"lattice convergence", 120, lattice_convergence},
      {"finite-volume LD concentration", 300, ld_concentration},
      {"quasi-average two-peak law", 300, quasi_average},
  };
  return all;
}

bool run_one(int n) {
  const auto& c = criteria()[static_cast<std::size_t>(n - 1)];
  std::printf("criterion %d: %s\n", n, c.name);
  std::fflush(stdout);
  Report r;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.check("no exception", false, e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.le("runtime [s]", secs, c.limit_s);
  std::printf("%s criterion %d (%s) %.2f s\n", r.pass() ? "PASS" : "FAIL", n, c.name, secs);
  std::fflush(stdout);
  return r.pass();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  const int count = static_cast<int>(criteria().size());
  if (which == "all") {
    bool ok = true;
    for (int n = 1; n <= count; ++n) ok = run_one(n) && ok;
    return ok ? 0 : 1;
  }
  const int n = std::atoi(which.c_str());
  if (n < 1 || n > count) {
    std::fprintf(stderr, "usage: acceptance [1-%d|all]\n", count);
    return 2;
  }
  return run_one(n) ? 0 : 1;
}
