#include "wibg/bog_pressure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "wibg/errors.hpp"
#include "wibg/quadrature.hpp"

namespace wibg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double radial = 1.0 / (2.0 * pi * pi);

std::vector<double> panel_cuts(const ThermoPoint& pt, const PotentialModel& model) {
  std::vector<double> cuts{0.0};
  const double ks = std::max(1.0, std::sqrt(pt.x * model.lambda0()));
  cuts.push_back(ks);
  if (pt.alpha < 0.0) cuts.push_back(std::sqrt(-pt.alpha));
  for (double b : model.breakpoints()) cuts.push_back(b);
  for (double t : {1.0, 10.0, 40.0}) cuts.push_back(std::sqrt(t / pt.beta));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

void check_point(const ThermoPoint& pt) {
  std::ostringstream msg;
  if (!(pt.beta > 0.0) || !std::isfinite(pt.beta)) msg << "beta must be positive, got " << pt.beta;
  else if (!(pt.alpha <= 0.0) || !std::isfinite(pt.alpha)) msg << "alpha must be <= 0, got " << pt.alpha;
  else if (!(pt.x >= 0.0) || !std::isfinite(pt.x)) msg << "x must be >= 0, got " << pt.x;
  else return;
  throw DomainError(msg.str());
}

QuasiparticleSpectrum quasiparticle_energy(const ThermoPoint& pt, double k, const PotentialModel& model) {
  check_point(pt);
  const double l = lambda_k(model, k);
  const double e = k * k - pt.alpha;
  const double coupling = pt.x * l;
  return {e + coupling, std::sqrt(e * (e + 2.0 * coupling))};
}

BogoliubovIntegrals bogoliubov_integrals(const ThermoPoint& pt, const PotentialModel& model,
                                         unsigned channels, double rel_tol) {
  check_point(pt);
  const double beta = pt.beta;
  const double alpha = pt.alpha;
  const double x = pt.x;

  auto integrand = [&](double k) {
    std::array<double, 6> v{};
    const double l = model(k);
    const double e = k * k - alpha;
    const double coupling = x * l;
    const double big_e = std::sqrt(e * (e + 2.0 * coupling));
    if (!(big_e > 0.0)) return v;
    const double f = e + coupling;
    const double k2 = k * k;
    const double bose = 1.0 / std::expm1(beta * big_e);
    if (channels & (1u << 0)) {
      const double be = beta * big_e;
      const double log_occ = be > std::numbers::ln2 ? std::log1p(-std::exp(-be)) : std::log(-std::expm1(-be));
      v[0] = -k2 * log_occ / beta;
    }
    if (channels & (1u << 1)) v[1] = 0.5 * k2 * coupling * coupling / (f + big_e);
    if (channels & (1u << 2)) v[2] = k2 * f / big_e * bose;
    if (channels & (1u << 3)) v[3] = k2 * coupling * coupling / (2.0 * big_e * (f + big_e));
    if (channels & (1u << 4)) v[4] = k2 * e * l / big_e * bose;
    if (channels & (1u << 5)) v[5] = k2 * l * e * coupling / (big_e * (big_e + e));
    return v;
  };

  auto panels = make_finite_panels(panel_cuts(pt, model));
  panels.push_back({panels.back().b, 0.0, true});
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 1e-250;
  const auto r = integrate(integrand, panels, opts);

  BogoliubovIntegrals out;
  out.thermal_pressure = radial * r.value[0];
  out.vacuum_pressure = radial * r.value[1];
  out.thermal_depletion = radial * r.value[2];
  out.quantum_depletion = radial * r.value[3];
  out.dx_thermal = radial * r.value[4];
  out.dx_vacuum = radial * r.value[5];
  return out;
}

double p0B(const ThermoPoint& pt, const PotentialModel& model) {
  const auto b = bogoliubov_integrals(pt, model, channel::pressure);
  return pt.alpha * pt.x + b.thermal_pressure + b.vacuum_pressure;
}

double depletion_density(const ThermoPoint& pt, const PotentialModel& model) {
  const auto b = bogoliubov_integrals(pt, model, channel::depletion);
  return b.thermal_depletion + b.quantum_depletion;
}

double p0B_dalpha(const ThermoPoint& pt, const PotentialModel& model) {
  return pt.x + depletion_density(pt, model);
}

double p0B_dx(const ThermoPoint& pt, const PotentialModel& model) {
  const auto b = bogoliubov_integrals(pt, model, channel::dx);
  return pt.alpha - b.dx_thermal + b.dx_vacuum;
}

double bose_polylog(double s, double mu) {
  if (mu > 0.0) throw DomainError("bose_polylog: argument mu must be <= 0");
  if (mu <= -0.5) {
    const double z = std::exp(mu);
    double sum = 0.0;
    double zn = 1.0;
    for (int n = 1; n < 400; ++n) {
      zn *= z;
      const double term = zn / std::pow(n, s);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  }
  double sum = mu < 0.0 ? boost::math::tgamma(1.0 - s) * std::pow(-mu, s - 1.0) : 0.0;
  double power = 1.0;  // mu^k / k!
  for (int k = 0; k < 60; ++k) {
    const double term = boost::math::zeta(s - k) * power;
    sum += term;
    if (k > 2 && std::abs(term) < 1e-18 * std::abs(sum)) break;
    power *= mu / (k + 1);
  }
  return sum;
}

double perfect_gas_pressure(double beta, double alpha) {
  if (!(beta > 0.0)) throw DomainError("perfect_gas_pressure: beta must be positive");
  if (!(alpha <= 0.0)) throw DomainError("perfect_gas_pressure: alpha must be <= 0");
  if (std::isinf(alpha)) return 0.0;
  return bose_polylog(2.5, beta * alpha) / (beta * std::pow(4.0 * pi * beta, 1.5));
}

double perfect_gas_density(double beta, double alpha) {
  if (!(beta > 0.0)) throw DomainError("perfect_gas_density: beta must be positive");
  if (!(alpha <= 0.0)) throw DomainError("perfect_gas_density: alpha must be <= 0");
  if (std::isinf(alpha)) return 0.0;
  return bose_polylog(1.5, beta * alpha) / std::pow(4.0 * pi * beta, 1.5);
}

}  // namespace wibg
