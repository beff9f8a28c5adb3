#pragma once

#include <optional>
#include <vector>

#include "wibg/potential.hpp"
#include "wibg/variational.hpp"

namespace wibg {

/// B(x) = (1/4 pi^2) int k^2 lambda min(1, x lambda / k^2) dk, an upper bound on the vacuum part of dp0B/dx.
double vacuum_slope_bound(double x, const PotentialModel& model);
/// dB/dx = (1/4 pi^2) int over k^2 > x lambda(k) of lambda^2 dk.
double vacuum_slope_bound_derivative(double x, const PotentialModel& model);

/// Smallest x beyond which d/dx of the inner infimum is certified negative through
/// mu - lambda0 x + B(x) < 0 (the bound is concave in x). Zero when it is negative everywhere.
double x_cap(double beta, double mu, const PotentialModel& model);

struct SuperstabilityBound {
  double M = 0.0;
  double B = 0.0;
};

/// mu (y + x) - f0B - (lambda0 / 2)(y + x)^2 <= -B (y + x) checked on an n x n grid of [M, 10 M]^2.
bool superstability_holds(double beta, double mu, const PotentialModel& model, double M, double B, int n = 8);

/// Doubles M until superstability_holds; throws NumericError when no M up to 2^60 M0 works.
SuperstabilityBound superstability_bound(double beta, double mu, const PotentialModel& model, double B = 1.0);

/// D_rho(x) with mu_rho and x_rho resolved once.
class RateD {
public:
  RateD(double beta, double rho, const PotentialModel& model, const std::optional<PhaseTransition>& transition);
  double operator()(double x) const;
  double beta() const { return beta_; }
  double rho() const { return rho_; }
  double mu() const { return mu_; }
  double x_rho() const { return x_rho_; }
  const PotentialModel& model() const { return model_; }

private:
  double beta_, rho_, mu_, x_rho_, reference_;
  PotentialModel model_;
};

/// K_mu(x, y) with p^SB(beta, mu) resolved once.
class RateK {
public:
  RateK(double beta, double mu, const PotentialModel& model);
  RateK(double beta, double mu, double pressure, const PotentialModel& model);
  double operator()(double x, double y) const;
  /// min over y in [0, y_max] by Brent search.
  double min_over_y(double x, double y_max) const;
  double beta() const { return beta_; }
  double mu() const { return mu_; }
  double pressure() const { return pressure_; }
  const PotentialModel& model() const { return model_; }

private:
  double beta_, mu_, pressure_;
  PotentialModel model_;
};

double rate_D(double beta, double rho, double x, const PotentialModel& model,
              const std::optional<PhaseTransition>& transition);
double rate_K(double beta, double mu, double x, double y, const PotentialModel& model);

struct Minimizer {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

struct RateGrid {
  std::vector<double> xs;
  /// Empty for D_rho tabulations.
  std::vector<double> ys;
  /// Row-major in x: values[i * ys.size() + j]; values[i] for D.
  std::vector<double> values;
  std::vector<Minimizer> minimizers;

  double at(std::size_t i, std::size_t j = 0) const { return values[ys.empty() ? i : i * ys.size() + j]; }
  /// Rates below 1e-12 shown as 0.
  static double reported(double v) { return v < 1e-12 ? 0.0 : v; }
};

struct RateWindow {
  double x_max = 0.0;
  double y_max = 0.0;
};

/// Rectangle [0, x_max] x [0, y_max] holding every zero of K_mu, from the condensate cap.
RateWindow rate_window(double beta, double mu, const PotentialModel& model);

/// Tabulates K on a uniform nx x ny grid; minimizers are refined grid-local minima with rate <= zero_tol.
RateGrid tabulate_K(const RateK& rate, const RateWindow& window, int nx = 256, int ny = 256,
                    double zero_tol = 1e-8);
RateGrid tabulate_D(const RateD& rate, double x_max, int nx = 256, double zero_tol = 1e-8);

}  // namespace wibg
