#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wibg {

/// Radial Fourier transforms lambda(|k|) of the two-body interaction.
///
/// All three families satisfy lambda(0) = lambda0 and 0 <= lambda(k) <= lambda0:
///   gaussian     lambda0 * exp(-k^2 / (2 sigma^2))
///   flat_cutoff  lambda0 for k <= kc, 0 beyond
///   rational     lambda0 / (1 + (k / sigma)^2)
enum class PotentialFamily { gaussian, flat_cutoff, rational };

std::string_view to_string(PotentialFamily family);
std::optional<PotentialFamily> parse_family(std::string_view name);

class PotentialModel {
public:
  static PotentialModel gaussian(double lambda0, double sigma);
  static PotentialModel flat_cutoff(double lambda0, double kc);
  static PotentialModel rational(double lambda0, double sigma);

  /// No checks; use validate() before computing with an unchecked model.
  PotentialModel(PotentialFamily family, double lambda0, double shape);

  PotentialFamily family() const { return family_; }
  double lambda0() const { return lambda0_; }
  /// sigma for gaussian/rational, kc for flat_cutoff.
  double shape() const { return shape_; }

  /// lambda(k) without argument checks (hot path of every quadrature).
  double operator()(double k) const;

  /// Wavenumbers where the profile changes character; quadrature panels split here.
  std::vector<double> breakpoints() const;
  /// Scale beyond which lambda is negligible or in its asymptotic regime.
  double decay_scale() const;

  /// phi(0) = (2 pi)^-3 int lambda(k) d^3k, +infinity for the rational family.
  double position_space_origin() const;

private:
  PotentialFamily family_;
  double lambda0_;
  double shape_;
};

/// Throws DomainError for k < 0.
double lambda_k(const PotentialModel& model, double k);

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  /// First sampled k violating 0 <= lambda <= lambda0, if any.
  std::optional<double> offending_k;
  /// d ln lambda / d ln k estimated on [10^2, 10^3] in units of the shape scale;
  /// -infinity when lambda vanishes or decays faster than any power.
  double tail_decay_exponent = 0.0;
  bool k2_lambda_integrable = true;
  bool k2_lambda_squared_integrable = true;
  /// int_0^K k^2 lambda^2 dk at K = 10, 100, 1000, 10000 (shape units).
  std::vector<double> k2_lambda_squared_partials;
};

ValidationReport validate(const PotentialModel& model);

}  // namespace wibg
