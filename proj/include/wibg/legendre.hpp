#pragma once

#include <vector>

#include "wibg/potential.hpp"

namespace wibg {

/// sup over alpha <= 0 of alpha (y + x) - p0B(beta, alpha, x).
struct ConjugateValue {
  double value = 0.0;
  /// Maximizing alpha (-infinity when y == 0, where the sup is only approached).
  double alpha = 0.0;
  /// y >= depletion(beta, 0, x): the sup sits on alpha = 0 and f0B is affine in y.
  bool affine = false;
};

struct FreeEnergyPoint {
  double y = 0.0;
  double x = 0.0;
  double f0B = 0.0;
  double fSB = 0.0;
};

ConjugateValue f0B_detail(double beta, double y, double x, const PotentialModel& model);
double f0B(double beta, double y, double x, const PotentialModel& model);
double fSB(double beta, double y, double x, const PotentialModel& model);
FreeEnergyPoint free_energy_point(double beta, double y, double x, const PotentialModel& model);

/// f0B at ascending ys for one x; each maximizer brackets the next.
std::vector<ConjugateValue> f0B_column(double beta, double x, const std::vector<double>& ys,
                                       const PotentialModel& model);

/// sup over y in [0, y_max] of alpha (y + x) - f0B(beta, y, x) (Brent search; restores p0B).
double double_conjugate(double beta, double alpha, double x, const PotentialModel& model, double y_max);

/// Psi(y, alpha) = alpha (y + x) - f0B(beta, y, x) + (mu - alpha)^2 / (2 lambda0).
struct PsiSaddle {
  double y = 0.0;
  double alpha = 0.0;
  /// sup_y inf_alpha Psi, from the stationary y.
  double sup_inf = 0.0;
  /// inf_alpha sup_y Psi, by nested Brent searches.
  double inf_sup = 0.0;
  /// y + x + (alpha - mu) / lambda0.
  double stationarity = 0.0;
};

PsiSaddle saddle_psi(double beta, double mu, double x, const PotentialModel& model);

/// Memoizes f0B on exact arguments. Thread safe; enabled by default.
void set_conjugate_cache(bool enabled);
void clear_conjugate_cache();

}  // namespace wibg
