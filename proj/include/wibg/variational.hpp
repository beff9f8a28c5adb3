#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "wibg/potential.hpp"

namespace wibg {

enum class Branch { normal, condensed };
std::string_view to_string(Branch branch);

/// Minimizer over alpha <= 0 of p0B(beta, alpha, x) + (mu - alpha)^2 / (2 lambda0).
struct InnerSolution {
  double alpha = 0.0;
  double value = 0.0;
  double depletion = 0.0;  // y = depletion_density(beta, alpha, x)
  bool saturated = false;  // minimizer on the boundary alpha = 0
};

InnerSolution inner_inf_alpha(double beta, double mu, double x, const PotentialModel& model);

/// d/dx of the inner infimum (envelope theorem: d p0B / dx at the inner minimizer).
double inner_slope(double beta, double mu, double x, const PotentialModel& model,
                   const InnerSolution& inner);

struct SaddleSolution {
  double mu = 0.0;
  double alpha_star = 0.0;
  double x_star = 0.0;
  double y_star = 0.0;
  double pressure = 0.0;
  Branch branch = Branch::normal;
  bool saturated = false;
  /// dp/dmu: x* + y* at an interior saddle, (mu - alpha*) / lambda0 when saturated.
  double rho = 0.0;
  /// y* + x* + (alpha* - mu) / lambda0, zero at an interior stationary point.
  double stationarity = 0.0;
};

/// Builds the saddle record at a given x (normal when x == 0).
SaddleSolution saddle_at(double beta, double mu, double x, const PotentialModel& model);

struct PressureResult {
  double pressure = 0.0;
  /// Global maximizers over x; two entries (normal first) when the branch values tie.
  std::vector<SaddleSolution> maximizers;
};

struct OuterOptions {
  int scan_points = 200;
  /// Branch values closer than this are reported as a tie.
  double tie_tolerance = 1e-10;
};

PressureResult pressure_sb(double beta, double mu, const PotentialModel& model, const OuterOptions& opts = {});

/// Every local maximizer of the inner infimum over x > 0 (x = 0 is always one, not listed).
std::vector<SaddleSolution> condensed_maxima(double beta, double mu, const PotentialModel& model,
                                             const OuterOptions& opts = {});

/// Follows the condensed maximizer near x_hint; falls back to a full scan when tracking fails.
std::optional<SaddleSolution> condensed_branch(double beta, double mu, const PotentialModel& model,
                                               std::optional<double> x_hint = std::nullopt);

struct PhaseTransition {
  double beta = 0.0;
  double mu_c = 0.0;
  double rho_minus = 0.0;
  double rho_plus = 0.0;
  double x_plus = 0.0;
  double y_plus = 0.0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double pressure = 0.0;
  /// Condensed minus normal branch value at mu_c.
  double delta_p = 0.0;
};

struct TransitionScan {
  double mu_min = -10.0;
  double mu_max = 10.0;
  int mu_points = 41;
  double dp_tolerance = 1e-10;
  double mu_tolerance = 1e-12;
};

/// nullopt when no condensed branch wins anywhere on the scan; ScanRangeExhausted when a condensed
/// branch exists at mu_max but still loses.
std::optional<PhaseTransition> find_transition(double beta, const PotentialModel& model,
                                               const TransitionScan& scan = {});

struct DensityResult {
  /// One entry, or two (normal then condensed) at mu_c.
  std::vector<SaddleSolution> branches;
  double rho() const;  // throws DomainError when two branches are present
  double rho(Branch pick) const;
};

DensityResult density_of_mu(double beta, double mu, const PotentialModel& model);

/// Density of one branch at mu (the normal branch is x = 0; the condensed one is tracked from x_hint).
double branch_density(double beta, double mu, Branch branch, const PotentialModel& model,
                      std::optional<double> x_hint = std::nullopt);

double mu_of_rho(double beta, double rho, const PotentialModel& model,
                 const std::optional<PhaseTransition>& transition);
double condensate_of_rho(double beta, double rho, const PotentialModel& model,
                         const std::optional<PhaseTransition>& transition);

/// Condensed-branch saddle at fixed density rho >= rho_plus.
SaddleSolution condensed_saddle_of_rho(double beta, double rho, const PotentialModel& model,
                                       const PhaseTransition& transition);

}  // namespace wibg
