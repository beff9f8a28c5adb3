#include <doctest.h>

#include <cmath>

#include "fixture.hpp"
#include "wibg/bog_pressure.hpp"
#include "wibg/legendre.hpp"
#include "wibg/variational.hpp"

using namespace wibg;
using namespace wibg::testing;

TEST_SUITE("legendre") {
  TEST_CASE("empty system") {
    const auto m = fixture_model();
    CHECK(std::abs(f0B(1, 0, 0, m)) <= 1e-8);
    const auto p = free_energy_point(1, 0, 0, m);
    CHECK(p.f0B == 0.0);
    CHECK(p.fSB == 0.0);
  }

  TEST_CASE("double conjugate restores p0B") {
    const auto g = PotentialModel::gaussian(1, 1);
    const double y_max = 4.0 * depletion_density({1, 0, 0.5}, g) + 1.0;
    CHECK(std::abs(double_conjugate(1, -1, 0.5, g, y_max) - p0B({1, -1, 0.5}, g)) <= 1e-6);
    const auto m = fixture_model();
    for (double a = -5.0; a <= -0.05; a += 0.7) {
      const double x = 0.1;
      const double ym = 4.0 * depletion_density({1, 0, x}, m) + 0.1;
      CHECK(std::abs(double_conjugate(1, a, x, m, ym) - p0B({1, a, x}, m)) <= 1e-6);
    }
  }

  TEST_CASE("Fenchel-Young on random points") {
    const auto m = fixture_model();
    for (int i = 0; i < 40; ++i) {
      const double a = uniform(-4, 0);
      const double y = uniform(0, 0.2);
      const double x = uniform(0, 0.5);
      CHECK(a * (y + x) <= p0B({1, a, x}, m) + f0B(1, y, x, m) + 1e-9);
    }
  }

  TEST_CASE("convex in y") {
    const auto m = fixture_model();
    for (double x : {0.0, 0.1, 0.4}) {
      std::vector<double> ys;
      for (int i = 0; i <= 40; ++i) ys.push_back(0.005 * i);
      const auto col = f0B_column(1, x, ys, m);
      for (std::size_t i = 1; i + 1 < ys.size(); ++i)
        CHECK(col[i].value <= 0.5 * (col[i - 1].value + col[i + 1].value) + 1e-9);
      for (std::size_t i = 0; i < ys.size(); ++i)
        CHECK(col[i].value == doctest::Approx(f0B(1, ys[i], x, m)).epsilon(1e-12));
    }
  }

  TEST_CASE("affine region beyond the alpha = 0 depletion") {
    const auto m = fixture_model();
    const double x = 0.2;
    const double d0 = depletion_density({1, 0, x}, m);
    const auto a = f0B_detail(1, d0 * 1.5, x, m);
    const auto b = f0B_detail(1, d0 * 2.0, x, m);
    CHECK(a.affine);
    CHECK(b.affine);
    CHECK(a.alpha == 0.0);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
  }

  TEST_CASE("fSB is affine in lambda0") {
    const auto m1 = PotentialModel::gaussian(1, 1);
    const auto m2 = PotentialModel::gaussian(2, 1);
    for (int i = 0; i < 10; ++i) {
      const double y = uniform(0, 0.1);
      const double x = uniform(0, 0.5);
      // lambda also rescales the profile, so compare the mean-field parts only
      const double d = fSB(1, y, x, m2) - f0B(1, y, x, m2) - (fSB(1, y, x, m1) - f0B(1, y, x, m1));
      CHECK(d == doctest::Approx(0.5 * (y + x) * (y + x)).epsilon(1e-12));
    }
  }

  TEST_CASE("Legendre transform of fSB restores the pinned-x pressure") {
    const auto m = fixture_model();
    const double mu = 0.5;
    const double x = 0.3;
    // sup_y { mu y - fSB(y, x) } + mu x by scan plus golden search
    auto obj = [&](double y) { return mu * (y + x) - fSB(1, y, x, m); };
    double best_y = 0.0;
    double best = obj(0.0);
    for (int i = 1; i <= 400; ++i) {
      const double y = 0.2 * i / 400;
      if (obj(y) > best) best = obj(y), best_y = y;
    }
    double lo = std::max(best_y - 0.0005, 0.0);
    double hi = best_y + 0.0005;
    for (int it = 0; it < 80; ++it) {
      const double a = lo + (hi - lo) / 3;
      const double b = hi - (hi - lo) / 3;
      if (obj(a) < obj(b)) lo = a;
      else hi = b;
    }
    best = obj(0.5 * (lo + hi));
    CHECK(std::abs(best - inner_inf_alpha(1, mu, x, m).value) <= 1e-6);
  }

  TEST_CASE("minimax equality for Psi") {
    const auto m = fixture_model();
    for (double mu : {-0.5, 0.3, 1.0, 5.0, 9.0})
      for (double x : {0.0, 0.1, 0.3}) {
        const auto s = saddle_psi(1, mu, x, m);
        CHECK(std::abs(s.sup_inf - s.inf_sup) <= 1e-6);
        if (inner_inf_alpha(1, mu, x, m).saturated) {
          CHECK(s.alpha == 0.0);
          CHECK(s.stationarity <= 1e-12);
        } else {
          CHECK(std::abs(s.stationarity) <= 1e-8);
        }
      }
  }

  TEST_CASE("saddle of Psi agrees with the variational saddle") {
    const auto m = fixture_model();
    for (double mu : {-0.3, 1.0, 7.0}) {
      const auto r = pressure_sb(1, mu, m);
      const auto& v = r.maximizers.front();
      const auto s = saddle_psi(1, mu, v.x_star, m);
      CHECK(std::abs(s.y - v.y_star) <= 1e-7);
      CHECK(std::abs(s.alpha - v.alpha_star) <= 1e-7);
    }
  }

  TEST_CASE("dilute limit of Psi") {
    const auto m = fixture_model();
    const auto s = saddle_psi(1, -20, 0, m);
    CHECK(s.y <= 1e-9);
    CHECK(std::abs(s.alpha - (-20)) <= 1e-7);
  }

  TEST_CASE("cache on and off agree") {
    const auto m = fixture_model();
    set_conjugate_cache(false);
    const double a = f0B(1, 0.03, 0.05, m);
    set_conjugate_cache(true);
    clear_conjugate_cache();
    const double b = f0B(1, 0.03, 0.05, m);
    const double c = f0B(1, 0.03, 0.05, m);
    CHECK(a == b);
    CHECK(b == c);
  }
}
