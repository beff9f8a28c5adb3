#pragma once

#include <cmath>
#include <optional>
#include <random>

#include "wibg/potential.hpp"
#include "wibg/variational.hpp"

namespace wibg::testing {

/// Transition fixture: gaussian profile, lambda0 = 30, sigma = 2, beta = 0.5.
inline PotentialModel fixture_model() { return PotentialModel::gaussian(30.0, 2.0); }
inline constexpr double fixture_beta = 0.5;

/// Frozen reference values at the fixture (independent scipy solve; x_plus, y_plus, rho_plus to ~1e-8).
inline constexpr double frozen_mu_c = 4.81862995027177;
inline constexpr double frozen_rho_minus = 0.160657441407228;
inline constexpr double frozen_rho_plus = 0.2008533762;
inline constexpr double frozen_x_plus = 0.1691254603;
inline constexpr double frozen_y_plus = 0.0317279158;

/// find_transition at the fixture, computed once per process.
inline const PhaseTransition& fixture_transition() {
  static const PhaseTransition t = *find_transition(fixture_beta, fixture_model());
  return t;
}

inline std::mt19937_64& rng(std::uint64_t seed = 20240611) {
  static std::mt19937_64 engine(seed);
  return engine;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

/// Bose function g_s(z) = sum_n z^n / n^s by direct summation (z < 1).
inline double bose_series(double s, double z) {
  double sum = 0.0;
  double zn = 1.0;
  for (int n = 1; n < 200000; ++n) {
    zn *= z;
    const double term = zn / std::pow(static_cast<double>(n), s);
    sum += term;
    if (term < 1e-19 * sum) break;
  }
  return sum;
}

/// Ideal Bose gas pressure and density, independent of the library.
inline double ideal_pressure(double beta, double alpha) {
  constexpr double pi = 3.14159265358979323846;
  return bose_series(2.5, std::exp(beta * alpha)) / (beta * std::pow(4.0 * pi * beta, 1.5));
}

inline double ideal_density(double beta, double alpha) {
  constexpr double pi = 3.14159265358979323846;
  return bose_series(1.5, std::exp(beta * alpha)) / std::pow(4.0 * pi * beta, 1.5);
}

}  // namespace wibg::testing
