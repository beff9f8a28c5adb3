#include "wibg/kac_mixture.hpp"

#include <cmath>
#include <sstream>

#include "wibg/errors.hpp"

namespace wibg {

namespace {

void require_gap(const PhaseTransition& t) {
  if (!(t.rho_plus > t.rho_minus)) throw DomainError("transition needs rho_plus > rho_minus");
}

// 1 / (1 + e^{-z}) without overflow.
double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double MixtureLaw::mean_x() const {
  return weight_normal * peak_normal.x + weight_condensed * peak_condensed.x;
}

double MixtureLaw::mean_density() const {
  return weight_normal * (peak_normal.x + peak_normal.y) + weight_condensed * (peak_condensed.x + peak_condensed.y);
}

double kappa(double rho, const PhaseTransition& t) {
  require_gap(t);
  if (!(rho >= t.rho_minus && rho <= t.rho_plus)) {
    std::ostringstream msg;
    msg << "kappa: rho = " << rho << " outside the plateau [" << t.rho_minus << ", " << t.rho_plus << "]";
    throw DomainError(msg.str());
  }
  return (rho - t.rho_minus) / (t.rho_plus - t.rho_minus);
}

double xi(double gamma, const PhaseTransition& t) {
  require_gap(t);
  return logistic(-gamma * (t.rho_plus - t.rho_minus));
}

double gamma_of_rho(double rho, const PhaseTransition& t) {
  require_gap(t);
  if (!(rho > t.rho_minus && rho < t.rho_plus)) {
    std::ostringstream msg;
    msg << "gamma_of_rho: rho = " << rho << " must lie strictly inside (" << t.rho_minus << ", " << t.rho_plus
        << "); the tilt diverges at the endpoints";
    throw DomainError(msg.str());
  }
  return std::log((rho - t.rho_minus) / (t.rho_plus - rho)) / (t.rho_plus - t.rho_minus);
}

double mixture_density(double gamma, const PhaseTransition& t) {
  require_gap(t);
  const double gap = t.rho_plus - t.rho_minus;
  return t.rho_minus + logistic(gamma * gap) * gap;
}

MixtureLaw quasi_average_law(double gamma, const PhaseTransition& t) {
  MixtureLaw law;
  law.weight_normal = xi(gamma, t);
  law.weight_condensed = logistic(gamma * (t.rho_plus - t.rho_minus));
  law.peak_normal = {0.0, t.rho_minus};
  law.peak_condensed = {t.x_plus, t.y_plus};
  return law;
}

MixtureLaw limit_measure(double beta, double rho, const PotentialModel& model,
                         const std::optional<PhaseTransition>& transition) {
  if (!(rho > 0.0)) throw DomainError("limit_measure: rho must be positive");
  MixtureLaw law;
  if (transition) {
    const auto& t = *transition;
    law.peak_normal = {0.0, std::min(rho, t.rho_minus)};
    law.peak_condensed = {t.x_plus, t.y_plus};
    if (rho < t.rho_minus) return law;
    if (rho <= t.rho_plus) {
      const double k = kappa(rho, t);
      law.weight_normal = 1.0 - k;
      law.weight_condensed = k;
      return law;
    }
    const auto s = condensed_saddle_of_rho(beta, rho, model, t);
    law.weight_normal = 0.0;
    law.weight_condensed = 1.0;
    law.peak_condensed = {s.x_star, s.y_star};
    return law;
  }
  const double x = condensate_of_rho(beta, rho, model, std::nullopt);
  if (x > 0.0) {
    law.weight_normal = 0.0;
    law.weight_condensed = 1.0;
    law.peak_condensed = {x, rho - x};
  } else {
    law.peak_normal = {0.0, rho};
  }
  return law;
}

}  // namespace wibg
