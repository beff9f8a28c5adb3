#include <doctest.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>

#include "fixture.hpp"
#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"
#include "wibg/variational.hpp"

using namespace wibg;
using namespace wibg::testing;

namespace {

// inf over alpha <= 0 by dense scan, then Brent minimization of the objective itself.
std::pair<double, double> scan_inner(double beta, double mu, double x, const PotentialModel& m, double lo) {
  auto obj = [&](double a) { return p0B({beta, a, x}, m) + (mu - a) * (mu - a) / (2 * m.lambda0()); };
  constexpr int n = 10000;
  int best = 0;
  double best_v = obj(lo);
  for (int i = 1; i <= n; ++i) {
    const double v = obj(lo * (1.0 - static_cast<double>(i) / n));
    if (v < best_v) best_v = v, best = i;
  }
  const double h = -lo / n;
  const double a = lo + std::max(best - 1, 0) * h;
  const double b = std::min(lo + (best + 1) * h, 0.0);
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::brent_find_minima(obj, a, b, 52, it);
  if (obj(0.0) < r.second) return {0.0, obj(0.0)};
  return {r.first, r.second};
}

// Mean-field gas: inf_alpha p_ideal(beta, alpha) + (mu - alpha)^2 / (2 lambda0).
double mean_field_pressure(double beta, double mu, double l0) {
  auto obj = [&](double a) { return ideal_pressure(beta, a) + (mu - a) * (mu - a) / (2 * l0); };
  std::uintmax_t it = 300;
  const auto r = boost::math::tools::brent_find_minima(obj, std::min(mu, 0.0) - 10.0, -1e-14, 52, it);
  return r.second;
}

constexpr double B = fixture_beta;

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("inner minimizer matches a grid scan") {
    const auto g = PotentialModel::gaussian(1, 1);
    const auto s = inner_inf_alpha(1, 1, 0.5, g);
    const auto [a, v] = scan_inner(1, 1, 0.5, g, -20);
    CHECK(std::abs(s.alpha - a) <= 1e-7);
    CHECK(s.value == doctest::Approx(v).epsilon(1e-12));
  }

  TEST_CASE("inner stationarity in the dilute and stiff limits") {
    const auto g = PotentialModel::gaussian(1, 1);
    const auto s = inner_inf_alpha(1, -50, 0, g);
    CHECK(std::abs(s.depletion + (s.alpha - (-50)) / 1.0) <= 1e-8);
    const auto stiff = PotentialModel::gaussian(1e3, 1);
    const auto t = inner_inf_alpha(1, 2, 0.1, stiff);
    const double dep = depletion_density({1, t.alpha, 0.1}, stiff);
    CHECK(std::abs(t.alpha - 2) <= 1e3 * (0.1 + dep) + 1e-9);
    CHECK(std::abs(0.1 + dep - (2 - t.alpha) / 1e3) <= 1e-10);
  }

  TEST_CASE("saturated inner solution at alpha = 0") {
    const auto m = fixture_model();
    const auto s = inner_inf_alpha(B, 5, 0.01, m);
    if (s.saturated) {
      CHECK(s.alpha == 0.0);
      CHECK(0.01 + s.depletion <= 5.0 / 10.0);
    }
  }

  TEST_CASE("empty-system limit") {
    const auto g = PotentialModel::gaussian(1, 1);
    const auto r = pressure_sb(1, -50, g);
    CHECK(r.pressure <= 1e-15);
    CHECK(r.pressure >= 0.0);
    REQUIRE(r.maximizers.size() == 1);
    CHECK(r.maximizers[0].x_star == 0.0);
    CHECK(density_of_mu(1, -40, g).rho() < 1e-15);
  }

  TEST_CASE("normal branch equals the mean-field gas") {
    const auto m = fixture_model();
    for (double mu : {-1.0, 0.0, 0.2}) {
      const auto r = pressure_sb(B, mu, m);
      REQUIRE(r.maximizers.size() == 1);
      CHECK(r.maximizers[0].branch == Branch::normal);
      CHECK(std::abs(r.pressure - mean_field_pressure(B, mu, 30)) <= 1e-9);
    }
  }

  TEST_CASE("no transition at high temperature") {
    CHECK_FALSE(find_transition(0.1, PotentialModel::gaussian(1, 1)).has_value());
  }

  TEST_CASE("transition at the fixture") {
    const auto& t = fixture_transition();
    CHECK(t.mu_c == doctest::Approx(frozen_mu_c).epsilon(1e-9));
    CHECK(t.rho_minus == doctest::Approx(frozen_rho_minus).epsilon(1e-8));
    CHECK(std::abs(t.rho_plus - frozen_rho_plus) <= 1e-8);
    CHECK(std::abs(t.x_plus - frozen_x_plus) <= 1e-8);
    CHECK(std::abs(t.y_plus - frozen_y_plus) <= 1e-8);
    CHECK(t.rho_plus > t.rho_minus);
    CHECK(t.x_plus > 0.0);
    CHECK(std::abs(t.delta_p) <= 1e-10);
    CHECK(t.rho_plus == doctest::Approx(t.x_plus + t.y_plus).epsilon(1e-12));

    const auto m = fixture_model();
    const auto r = pressure_sb(B, t.mu_c, m);
    REQUIRE(r.maximizers.size() == 2);
    CHECK(std::abs(r.maximizers[0].pressure - r.maximizers[1].pressure) <= 1e-10);
    for (const auto& s : r.maximizers) CHECK(std::abs(s.stationarity) <= 1e-8);
  }

  TEST_CASE("pressure continuity and density jump across mu_c") {
    const auto& t = fixture_transition();
    const auto m = fixture_model();
    const double eps = 1e-4;
    const double pm = pressure_sb(B, t.mu_c - eps, m).pressure;
    const double pp = pressure_sb(B, t.mu_c + eps, m).pressure;
    CHECK(std::abs(pm - pp) <= 2 * eps * t.rho_plus + 1e-9);
    const double p0 = t.pressure;
    const double left = (p0 - pm) / eps;
    const double right = (pp - p0) / eps;
    CHECK(std::abs((right - left) - (t.rho_plus - t.rho_minus)) <= 1e-4);
    CHECK(density_of_mu(B, t.mu_c - eps, m).rho() <= t.rho_minus);
    CHECK(density_of_mu(B, t.mu_c + eps, m).rho() >= t.rho_plus);
    CHECK_THROWS_AS(density_of_mu(B, t.mu_c, m).rho(), DomainError);
  }

  TEST_CASE("density is the mu derivative of the pressure") {
    const auto m = fixture_model();
    for (double mu : {-0.5, 3.0, 6.0}) {
      const double h = 1e-4;
      const double fd = (pressure_sb(B, mu + h, m).pressure - pressure_sb(B, mu - h, m).pressure) / (2 * h);
      CHECK(std::abs(density_of_mu(B, mu, m).rho() - fd) <= 1e-5);
    }
  }

  TEST_CASE("pressure is convex in mu across the transition") {
    const auto m = fixture_model();
    const double c = fixture_transition().mu_c;
    for (int i = -4; i <= 4; ++i) {
      const double mu = c + 0.05 * i + 0.013;
      const double d = 0.04;
      CHECK(pressure_sb(B, mu, m).pressure <=
            0.5 * (pressure_sb(B, mu - d, m).pressure + pressure_sb(B, mu + d, m).pressure) + 1e-9);
    }
  }

  TEST_CASE("mu_of_rho round trips and plateau") {
    const auto& t = fixture_transition();
    const auto m = fixture_model();
    for (double rho : {0.01, 0.08, 0.15}) {
      const double mu = mu_of_rho(B, rho, m, t);
      CHECK(std::abs(density_of_mu(B, mu, m).rho() - rho) <= 1e-8);
    }
    CHECK(mu_of_rho(B, 0.5 * (t.rho_minus + t.rho_plus), m, t) == t.mu_c);
    const double rho = 0.45;
    const double mu = mu_of_rho(B, rho, m, t);
    CHECK(std::abs(density_of_mu(B, mu, m).rho() - rho) <= 1e-8);
  }

  TEST_CASE("condensate curve: zero, linear, continuous") {
    const auto& t = fixture_transition();
    const auto m = fixture_model();
    CHECK(condensate_of_rho(B, t.rho_minus, m, t) == 0.0);
    CHECK(condensate_of_rho(B, 0.5 * t.rho_minus, m, t) == 0.0);
    CHECK(condensate_of_rho(B, 0.5 * (t.rho_minus + t.rho_plus), m, t) ==
          doctest::Approx(0.5 * t.x_plus).epsilon(1e-12));
    const auto s = condensed_saddle_of_rho(B, t.rho_plus, m, t);
    CHECK(std::abs(s.x_star - t.x_plus) <= 1e-8);
    CHECK(std::abs(condensate_of_rho(B, t.rho_plus, m, t) - t.x_plus) <= 1e-8);
    double prev = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double rho = t.rho_plus * (1.0 + 0.9 * i);
      const double ratio = condensate_of_rho(B, rho, m, t) / rho;
      CHECK(ratio >= prev);
      prev = ratio;
    }
  }

  TEST_CASE("stationarity of condensed saddles") {
    const auto m = fixture_model();
    for (double mu : {5.0, 6.5, 9.0}) {
      const auto r = pressure_sb(B, mu, m);
      REQUIRE(r.maximizers.size() == 1);
      CHECK(r.maximizers[0].branch == Branch::condensed);
      CHECK(std::abs(r.maximizers[0].stationarity) <= 1e-8);
      CHECK(std::abs(inner_slope(B, mu, r.maximizers[0].x_star, m, inner_inf_alpha(B, mu, r.maximizers[0].x_star, m))) <= 1e-8);
    }
  }
}
