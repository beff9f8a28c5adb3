#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wibg/potential.hpp"
#include "wibg/rates.hpp"
#include "wibg/variational.hpp"

namespace wibg {

/// Periodic box of side L: momenta (2 pi / L) n, n in Z^3 \ {0}, |k| <= k_cutoff.
struct LatticeConfig {
  double box_side = 16.0;
  /// 0 selects a cutoff where every summand is below 1e-16 of its peak.
  double k_cutoff = 0.0;
};

/// Default cutoff used when LatticeConfig::k_cutoff is 0.
double auto_cutoff(double beta, double alpha, const PotentialModel& model);

/// Number of n in Z^3 with |n|^2 = m, for m = 0..m_max.
std::vector<std::uint64_t> shell_counts(std::uint64_t m_max);

/// alpha x + (1/V) sum over the lattice of -(1/beta) ln(1 - e^{-beta E}) + (f - E)/2.
double lattice_p0B(double beta, double alpha, double x, const PotentialModel& model, const LatticeConfig& cfg);

struct Focus {
  double center = 0.0;
  double width = 1.0;
};

/// n nodes on [lo, hi] from a mixed density: a uniform share plus one Cauchy bump per focus.
/// Pinned points are inserted exactly.
struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int n = 512;
  std::vector<Focus> foci;
  std::vector<double> pinned;
  double uniform_share = 0.2;
};

std::vector<double> graded_axis(const AxisSpec& spec);

/// K_mu sampled on a rectangular (x, y) grid; weights for any V and tilt reuse it.
struct FreeEnergyField {
  double beta = 1.0;
  double mu = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> rate;  // row-major in x
};

FreeEnergyField tabulate_field(const RateK& rate, std::vector<double> xs, std::vector<double> ys);

/// Stationary points of the Laplace exponent (normal and every condensed local maximum).
struct Peak {
  double x = 0.0;
  double y = 0.0;
  Branch branch = Branch::normal;
  /// Decay rate of K in x at x = 0 (normal peak) or d^2 K / dx^2 (condensed peak).
  double kx = 0.0;
  /// d^2 K / dy^2 along the peak.
  double kyy = 0.0;
};

std::vector<Peak> find_peaks(const RateK& rate);

/// Axis foci resolving each peak at every volume of the sweep.
struct GridSpec {
  int nx = 512;
  int ny = 512;
  double x_max = 0.0;
  double y_max = 0.0;
  std::vector<double> volumes{1e2, 1e3, 1e4, 1e5};
};

FreeEnergyField peak_adapted_field(const RateK& rate, const GridSpec& spec);

/// Normalized Laplace weights exp(beta V (mu (x + y) - fSB) + gamma (x + y)) times trapezoid cell areas.
struct WeightGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  double gamma = 0.0;
  double volume = 0.0;
  double mu = 0.0;
  double beta = 1.0;
  std::vector<double> weights;  // row-major in x, sums to 1
  /// ln of weights, kept separately so far tails do not underflow.
  std::vector<double> log_weights;
  /// 0 normal, 1 condensed, per node (empty until assign_basins).
  std::vector<std::uint8_t> basin;
  /// ln of the unnormalized total with K as exponent: ln sum exp(-beta V K + gamma s) dA.
  double log_partition = 0.0;

  double at(std::size_t i, std::size_t j) const { return weights[i * ys.size() + j]; }
};

WeightGrid laplace_weight_grid(const FreeEnergyField& field, double volume, double gamma);
/// Builds a peak-adapted field first; convenient for one-off grids.
WeightGrid laplace_weight_grid(double beta, double mu, double gamma, double volume, const GridSpec& spec,
                               const PotentialModel& model);

/// Nodes with x < x_split form the normal basin.
void assign_basins(WeightGrid& wg, double x_split);
/// Split at x_plus / 2.
void assign_basins(WeightGrid& wg, const PhaseTransition& t);

struct BasinMasses {
  double normal = 0.0;
  double condensed = 0.0;
};

BasinMasses basin_masses(WeightGrid& wg, const PhaseTransition& t);
BasinMasses basin_masses(WeightGrid& wg, double x_split);

struct Moments {
  double mean_x = 0.0;
  double mean_density = 0.0;
};

Moments moments(const WeightGrid& wg);

struct Rect {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
};

/// ln of the normalized mass inside rect (trapezoid rule restricted to the rectangle).
double log_mass(const WeightGrid& wg, const Rect& rect);

/// min of K over rect: Brent search in y for each x of a scan, polished in x.
double min_rate_over(const RateK& rate, const Rect& rect);

struct LdRow {
  double volume = 0.0;
  double scaled_log_mass = 0.0;  // (1 / beta V) ln mass(rect)
};

struct LdCheck {
  double target = 0.0;  // -min over rect of K
  std::vector<LdRow> rows;
};

LdCheck ld_convergence_check(double beta, double mu, const std::vector<double>& volumes, const Rect& rect,
                             const PotentialModel& model, int n = 384);

/// Condensed over normal basin mass at zero tilt.
double theta(WeightGrid& wg, const PhaseTransition& t);

}  // namespace wibg
