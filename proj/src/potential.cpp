#include "wibg/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wibg/errors.hpp"
#include "wibg/quadrature.hpp"

namespace wibg {

std::string_view to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::gaussian: return "gaussian";
    case PotentialFamily::flat_cutoff: return "flat_cutoff";
    case PotentialFamily::rational: return "rational";
  }
  return "unknown";
}

std::optional<PotentialFamily> parse_family(std::string_view name) {
  if (name == "gaussian") return PotentialFamily::gaussian;
  if (name == "flat_cutoff") return PotentialFamily::flat_cutoff;
  if (name == "rational") return PotentialFamily::rational;
  return std::nullopt;
}

PotentialModel::PotentialModel(PotentialFamily family, double lambda0, double shape)
    : family_(family), lambda0_(lambda0), shape_(shape) {}

PotentialModel PotentialModel::gaussian(double lambda0, double sigma) {
  return {PotentialFamily::gaussian, lambda0, sigma};
}

PotentialModel PotentialModel::flat_cutoff(double lambda0, double kc) {
  return {PotentialFamily::flat_cutoff, lambda0, kc};
}

PotentialModel PotentialModel::rational(double lambda0, double sigma) {
  return {PotentialFamily::rational, lambda0, sigma};
}

double PotentialModel::operator()(double k) const {
  switch (family_) {
    case PotentialFamily::gaussian: {
      const double u = k / shape_;
      return lambda0_ * std::exp(-0.5 * u * u);
    }
    case PotentialFamily::flat_cutoff:
      return k <= shape_ ? lambda0_ : 0.0;
    case PotentialFamily::rational: {
      const double u = k / shape_;
      return lambda0_ / (1.0 + u * u);
    }
  }
  return 0.0;
}

std::vector<double> PotentialModel::breakpoints() const {
  switch (family_) {
    case PotentialFamily::gaussian: return {shape_, 3.0 * shape_, 6.0 * shape_};
    case PotentialFamily::flat_cutoff: return {shape_};
    case PotentialFamily::rational: return {shape_, 10.0 * shape_};
  }
  return {};
}

double PotentialModel::decay_scale() const {
  switch (family_) {
    case PotentialFamily::gaussian: return 9.0 * shape_;
    case PotentialFamily::flat_cutoff: return shape_;
    case PotentialFamily::rational: return 10.0 * shape_;
  }
  return shape_;
}

double PotentialModel::position_space_origin() const {
  constexpr double pi = std::numbers::pi;
  const double s3 = shape_ * shape_ * shape_;
  switch (family_) {
    case PotentialFamily::gaussian:
      // int_0^inf k^2 e^{-k^2/2s^2} dk = s^3 sqrt(pi/2)
      return lambda0_ * s3 * std::sqrt(pi / 2.0) / (2.0 * pi * pi);
    case PotentialFamily::flat_cutoff:
      return lambda0_ * s3 / (6.0 * pi * pi);
    case PotentialFamily::rational:
      return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

double lambda_k(const PotentialModel& model, double k) {
  if (!(k >= 0.0)) {
    std::ostringstream msg;
    msg << "lambda_k: wavenumber must be >= 0, got " << k;
    throw DomainError(msg.str());
  }
  return model(k);
}

namespace {

// int_0^K k^p lambda(k)^q dk, split at the model breakpoints.
double radial_moment(const PotentialModel& model, double upper, int q) {
  std::vector<double> cuts{0.0};
  for (double b : model.breakpoints())
    if (b < upper) cuts.push_back(b);
  for (double c = 10.0 * model.shape(); c < upper; c *= 10.0) cuts.push_back(c);
  cuts.push_back(upper);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto integrand = [&](double k) {
    const double l = model(k);
    return std::array<double, 1>{k * k * (q == 1 ? l : l * l)};
  };
  QuadratureOptions opts;
  opts.rel_tol = 1e-10;
  return integrate(integrand, make_finite_panels(cuts), opts).value[0];
}

}  // namespace

ValidationReport validate(const PotentialModel& model) {
  ValidationReport report;
  auto fail = [&](std::string msg) {
    report.valid = false;
    report.errors.push_back(std::move(msg));
  };

  if (!(model.lambda0() > 0.0) || !std::isfinite(model.lambda0())) {
    fail("lambda0 must be positive");
  }
  if (!(model.shape() > 0.0) || !std::isfinite(model.shape())) {
    fail(model.family() == PotentialFamily::flat_cutoff ? "kc must be positive"
                                                        : "sigma must be positive");
  }
  if (!report.valid) return report;

  const double l0 = model.lambda0();
  if (model(0.0) != l0) fail("lambda(0) differs from lambda0");

  // Log grid over [1e-6, 1e6] shape units plus k = 0.
  constexpr int samples = 2000;
  for (int i = 0; i <= samples; ++i) {
    const double k = i == 0 ? 0.0 : model.shape() * std::pow(10.0, -6.0 + 12.0 * i / samples);
    const double l = model(k);
    if (!(l >= 0.0) || l > l0 * (1.0 + 1e-15)) {
      std::ostringstream msg;
      msg << "bound 0 <= lambda(k) <= lambda0 violated at k = " << k << " (lambda = " << l << ")";
      fail(msg.str());
      report.offending_k = k;
      break;
    }
  }

  const double k1 = 100.0 * model.shape();
  const double k2 = 1000.0 * model.shape();
  const double l1 = model(k1);
  const double l2 = model(k2);
  if (l1 > 0.0 && l2 > 0.0) {
    report.tail_decay_exponent = std::log(l2 / l1) / std::log(k2 / k1);
    if (report.tail_decay_exponent < -50.0)
      report.tail_decay_exponent = -std::numeric_limits<double>::infinity();
  } else {
    report.tail_decay_exponent = -std::numeric_limits<double>::infinity();
  }

  // Tail integrability: increments of the partial integrals over successive decades
  // must shrink geometrically.
  auto decade_test = [&](int q, std::vector<double>* partials) {
    std::vector<double> values;
    for (double cut = 10.0; cut <= 1e4; cut *= 10.0)
      values.push_back(radial_moment(model, cut * model.shape(), q));
    if (partials) *partials = values;
    const double d1 = values[2] - values[1];
    const double d2 = values[3] - values[2];
    return d2 <= 0.5 * d1 + 1e-14 * std::abs(values[3]);
  };
  report.k2_lambda_squared_integrable = decade_test(2, &report.k2_lambda_squared_partials);
  report.k2_lambda_integrable = decade_test(1, nullptr);
  if (!report.k2_lambda_squared_integrable)
    fail("int k^2 lambda(k)^2 dk diverges; the vacuum term of p0B is undefined");
  if (!report.k2_lambda_integrable)
    report.warnings.push_back(
        "int k^2 lambda(k) dk diverges (phi(0) infinite); x caps fall back to the tail-aware bound");
  return report;
}

}  // namespace wibg
