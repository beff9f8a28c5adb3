#pragma once

#include <optional>

#include "wibg/potential.hpp"
#include "wibg/variational.hpp"

namespace wibg {

struct Atom {
  double x = 0.0;
  double y = 0.0;
};

/// Limiting law of (x, y): at most two atoms; the condensate phase is uniform on [0, 2 pi).
struct MixtureLaw {
  double weight_normal = 1.0;
  double weight_condensed = 0.0;
  Atom peak_normal;
  Atom peak_condensed;
  bool uniform_phase = true;

  double mean_x() const;
  double mean_density() const;  // E[x + y]
};

/// (rho - rho_-) / (rho_+ - rho_-); DomainError outside [rho_-, rho_+].
double kappa(double rho, const PhaseTransition& t);
/// 1 / (1 + e^{gamma (rho_+ - rho_-)}).
double xi(double gamma, const PhaseTransition& t);
/// ln((rho - rho_-) / (rho_+ - rho)) / (rho_+ - rho_-); DomainError unless rho_- < rho < rho_+.
double gamma_of_rho(double rho, const PhaseTransition& t);
/// xi rho_- + (1 - xi) rho_+.
double mixture_density(double gamma, const PhaseTransition& t);

/// Weights (xi_gamma, 1 - xi_gamma) on the two coexisting peaks at mu_c.
MixtureLaw quasi_average_law(double gamma, const PhaseTransition& t);

MixtureLaw limit_measure(double beta, double rho, const PotentialModel& model,
                         const std::optional<PhaseTransition>& transition);

}  // namespace wibg
