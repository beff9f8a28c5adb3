#pragma once

#include "wibg/potential.hpp"

namespace wibg {

/// (beta, alpha, x): inverse temperature > 0, effective chemical potential <= 0, condensate density >= 0.
struct ThermoPoint {
  double beta = 1.0;
  double alpha = -1.0;
  double x = 0.0;
};

/// f_k = eps_k - alpha + x lambda_k and E_k = sqrt(f_k^2 - x^2 lambda_k^2), eps_k = k^2.
struct QuasiparticleSpectrum {
  double f = 0.0;
  double e = 0.0;
};

/// Throws DomainError unless beta > 0, alpha <= 0, x >= 0 (all finite).
void check_point(const ThermoPoint& pt);

QuasiparticleSpectrum quasiparticle_energy(const ThermoPoint& pt, double k, const PotentialModel& model);

/// Radial integrals entering p0B and its derivatives, each already multiplied by 1/(2 pi^2).
struct BogoliubovIntegrals {
  double thermal_pressure = 0.0;   // -(1/beta) int k^2 ln(1 - e^{-beta E}) dk
  double vacuum_pressure = 0.0;    // (1/2) int k^2 (f - E) dk
  double thermal_depletion = 0.0;  // int k^2 f / (E (e^{beta E} - 1)) dk
  double quantum_depletion = 0.0;  // int k^2 x^2 lambda^2 / (2 E (f + E)) dk
  double dx_thermal = 0.0;         // int k^2 (eps - alpha) lambda / (E (e^{beta E} - 1)) dk
  double dx_vacuum = 0.0;          // (1/2) int k^2 lambda (1 - (eps - alpha)/E) dk
};

namespace channel {
inline constexpr unsigned pressure = 1u << 0 | 1u << 1;
inline constexpr unsigned depletion = 1u << 2 | 1u << 3;
inline constexpr unsigned dx = 1u << 4 | 1u << 5;
inline constexpr unsigned all = pressure | depletion | dx;
}  // namespace channel

/// Evaluates the selected channels in one adaptive pass. Unselected fields stay 0.
BogoliubovIntegrals bogoliubov_integrals(const ThermoPoint& pt, const PotentialModel& model,
                                         unsigned channels = channel::all, double rel_tol = 1e-12);

/// alpha x + thermal + vacuum pressure.
double p0B(const ThermoPoint& pt, const PotentialModel& model);
/// x + depletion_density.
double p0B_dalpha(const ThermoPoint& pt, const PotentialModel& model);
/// alpha - dx_thermal + dx_vacuum.
double p0B_dx(const ThermoPoint& pt, const PotentialModel& model);
double depletion_density(const ThermoPoint& pt, const PotentialModel& model);

/// Li_s(e^mu) for mu <= 0 and s in {3/2, 5/2}: exponential series for mu <= -1/2,
/// the Robinson expansion around mu = 0 otherwise.
double bose_polylog(double s, double mu);

/// Ideal Bose gas g_{5/2}(e^{beta alpha}) / (beta (4 pi beta)^{3/2}).
double perfect_gas_pressure(double beta, double alpha);
/// Ideal Bose gas g_{3/2}(e^{beta alpha}) / (4 pi beta)^{3/2}.
double perfect_gas_density(double beta, double alpha);

}  // namespace wibg
