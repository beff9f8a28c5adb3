#include "wibg/finite_volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"
#include "wibg/legendre.hpp"
#include "wibg/parallel.hpp"

namespace wibg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double mode_term(double beta, double alpha, double x, double k, const PotentialModel& model) {
  const double e = k * k - alpha;
  const double coupling = x * model(k);
  const double big_e = std::sqrt(e * (e + 2.0 * coupling));
  const double f = e + coupling;
  if (!(big_e > 0.0)) return 0.0;  // only reachable at k = 0, alpha = 0
  const double be = beta * big_e;
  const double log_occ = be > std::numbers::ln2 ? std::log1p(-std::exp(-be)) : std::log(-std::expm1(-be));
  return -log_occ / beta + 0.5 * coupling * coupling / (f + big_e);
}

}  // namespace

double auto_cutoff(double beta, double, const PotentialModel& model) {
  double k = std::sqrt(40.0 / beta);
  switch (model.family()) {
    case PotentialFamily::gaussian: k = std::max(k, 6.5 * model.shape()); break;
    case PotentialFamily::flat_cutoff: k = std::max(k, model.shape()); break;
    case PotentialFamily::rational: k = std::max(k, 30.0 * model.shape()); break;
  }
  return k;
}

std::vector<std::uint64_t> shell_counts(std::uint64_t m_max) {
  const auto r = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(m_max)))) + 1;
  std::vector<std::uint64_t> r2(m_max + 1, 0);
  for (std::int64_t a = -r; a <= r; ++a)
    for (std::int64_t b = -r; b <= r; ++b) {
      const auto m = static_cast<std::uint64_t>(a * a + b * b);
      if (m <= m_max) ++r2[m];
    }
  std::vector<std::uint64_t> r3(m_max + 1, 0);
  for (std::int64_t c = -r; c <= r; ++c) {
    const auto c2 = static_cast<std::uint64_t>(c * c);
    if (c2 > m_max) continue;
    for (std::uint64_t m = c2; m <= m_max; ++m) r3[m] += r2[m - c2];
  }
  return r3;
}

double lattice_p0B(double beta, double alpha, double x, const PotentialModel& model, const LatticeConfig& cfg) {
  check_point({beta, alpha, x});
  const double side = cfg.box_side;
  if (!(side > 0.0)) throw DomainError("lattice_p0B: box_side must be positive");
  const double spacing = two_pi / side;
  const double cutoff = cfg.k_cutoff > 0.0 ? cfg.k_cutoff : auto_cutoff(beta, alpha, model);
  if (!(cutoff > spacing)) throw DomainError("lattice_p0B: k_cutoff must exceed 2 pi / L");
  const double n_max = cutoff / spacing;
  const auto m_max = static_cast<std::uint64_t>(std::floor(n_max * n_max));
  const auto counts = shell_counts(m_max);
  double sum = 0.0;
  for (std::uint64_t m = m_max; m >= 1; --m) {
    if (counts[m] == 0) continue;
    const double k = spacing * std::sqrt(static_cast<double>(m));
    sum += static_cast<double>(counts[m]) * mode_term(beta, alpha, x, k, model);
  }
  return alpha * x + sum / (side * side * side);
}

std::vector<double> graded_axis(const AxisSpec& spec) {
  if (!(spec.hi > spec.lo)) throw DomainError("graded_axis: need hi > lo");
  if (spec.n < 2) throw DomainError("graded_axis: need at least 2 nodes");
  const double lo = spec.lo;
  const double hi = spec.hi;
  const double share = spec.foci.empty() ? 1.0 : spec.uniform_share;
  const double each = spec.foci.empty() ? 0.0 : (1.0 - share) / static_cast<double>(spec.foci.size());
  auto cdf = [&](double s) {
    double c = share * (s - lo) / (hi - lo);
    for (const auto& f : spec.foci) {
      const double a = std::atan((lo - f.center) / f.width);
      const double b = std::atan((hi - f.center) / f.width);
      c += each * (std::atan((s - f.center) / f.width) - a) / (b - a);
    }
    return c;
  };
  std::vector<double> nodes{lo, hi};
  for (int i = 1; i + 1 < spec.n; ++i) {
    const double target = static_cast<double>(i) / (spec.n - 1);
    double a = lo;
    double b = hi;
    for (int it = 0; it < 100; ++it) {
      const double m = 0.5 * (a + b);
      if (cdf(m) < target) a = m;
      else b = m;
    }
    nodes.push_back(0.5 * (a + b));
  }
  for (double p : spec.pinned)
    if (p >= lo && p <= hi) nodes.push_back(p);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (double v : nodes)
    if (out.empty() || v - out.back() > 1e-13 * std::max(1.0, std::abs(v))) out.push_back(v);
  // keep pinned values exact when a generated node sat next to them
  for (double p : spec.pinned) {
    auto it = std::lower_bound(out.begin(), out.end(), p);
    if (it != out.end() && std::abs(*it - p) <= 1e-13 * std::max(1.0, std::abs(p))) *it = p;
    else if (it != out.begin() && std::abs(*(it - 1) - p) <= 1e-13 * std::max(1.0, std::abs(p))) *(it - 1) = p;
  }
  return out;
}

FreeEnergyField tabulate_field(const RateK& rate, std::vector<double> xs, std::vector<double> ys) {
  FreeEnergyField field;
  field.beta = rate.beta();
  field.mu = rate.mu();
  field.xs = std::move(xs);
  field.ys = std::move(ys);
  field.rate.resize(field.xs.size() * field.ys.size());
  const double l0 = rate.model().lambda0();
  const std::size_t ny = field.ys.size();
  parallel_for(field.xs.size(), [&](std::size_t i) {
    const double x = field.xs[i];
    const auto col = f0B_column(rate.beta(), x, field.ys, rate.model());
    for (std::size_t j = 0; j < ny; ++j) {
      const double s = x + field.ys[j];
      field.rate[i * ny + j] = rate.pressure() + col[j].value + 0.5 * l0 * s * s - rate.mu() * s;
    }
  });
  return field;
}

std::vector<Peak> find_peaks(const RateK& rate) {
  const double beta = rate.beta();
  const double mu = rate.mu();
  const auto& model = rate.model();
  auto kyy = [&](double x, double y) {
    const double h = 1e-4 * std::max(y, 0.05);
    const double lo = std::max(y - h, 0.0);
    const double mid = lo + h;
    const double v = (rate(x, lo + 2.0 * h) - 2.0 * rate(x, mid) + rate(x, lo)) / (h * h);
    return std::max(v, model.lambda0());
  };
  std::vector<Peak> peaks;
  const auto normal = saddle_at(beta, mu, 0.0, model);
  Peak n;
  n.x = 0.0;
  n.y = normal.y_star;
  n.kx = std::max(-p0B_dx({beta, normal.alpha_star, 0.0}, model), 1e-8);
  n.kyy = kyy(0.0, n.y);
  peaks.push_back(n);
  for (const auto& c : condensed_maxima(beta, mu, model)) {
    Peak p;
    p.x = c.x_star;
    p.y = c.y_star;
    p.branch = Branch::condensed;
    const double h = 1e-4 * c.x_star;
    const double sp = p0B_dx({beta, inner_inf_alpha(beta, mu, c.x_star + h, model).alpha, c.x_star + h}, model);
    const double sm = p0B_dx({beta, inner_inf_alpha(beta, mu, c.x_star - h, model).alpha, c.x_star - h}, model);
    p.kx = std::max(-(sp - sm) / (2.0 * h), 1e-8);
    p.kyy = kyy(p.x, p.y);
    peaks.push_back(p);
  }
  return peaks;
}

FreeEnergyField peak_adapted_field(const RateK& rate, const GridSpec& spec) {
  const auto peaks = find_peaks(rate);
  const double beta = rate.beta();
  const double v_min = *std::min_element(spec.volumes.begin(), spec.volumes.end());
  // Extent: K at least 60 / (beta V_min) beyond the peaks, so no mass reaches the edges.
  const double threshold = 60.0 / (beta * v_min);
  const auto window = rate_window(beta, rate.mu(), rate.model());
  double x_max = spec.x_max;
  double y_max = spec.y_max;
  if (!(y_max > 0.0)) {
    y_max = window.y_max;
    for (const auto& p : peaks) y_max = std::max(y_max, p.y + 1.5 * std::sqrt(2.0 * threshold / p.kyy));
  }
  if (!(x_max > 0.0)) {
    x_max = window.x_max;
    for (const auto& p : peaks) x_max = std::max(x_max, 1.25 * p.x);
    for (int it = 0; it < 60 && rate.min_over_y(x_max, y_max) < threshold; ++it) x_max *= 1.25;
  }

  AxisSpec ax{0.0, x_max, spec.nx, {}, {0.0, x_max}, 0.2};
  AxisSpec ay{0.0, y_max, spec.ny, {}, {0.0, y_max}, 0.2};
  for (const auto& p : peaks) {
    ax.pinned.push_back(p.x);
    ay.pinned.push_back(p.y);
    for (double v : spec.volumes) {
      const double bv = beta * v;
      const double wx = p.branch == Branch::normal ? 1.0 / (bv * p.kx) : 1.0 / std::sqrt(bv * p.kx);
      ax.foci.push_back({p.x, std::max(wx, 1e-12 * x_max)});
      ay.foci.push_back({p.y, 1.0 / std::sqrt(bv * p.kyy)});
    }
  }
  return tabulate_field(rate, graded_axis(ax), graded_axis(ay));
}

namespace {

std::vector<double> trapezoid(const std::vector<double>& nodes, std::size_t first, std::size_t last) {
  std::vector<double> w(nodes.size(), 0.0);
  if (last <= first) {
    if (first < nodes.size()) w[first] = 0.0;
    return w;
  }
  for (std::size_t i = first; i < last; ++i) {
    const double h = 0.5 * (nodes[i + 1] - nodes[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

WeightGrid laplace_weight_grid(const FreeEnergyField& field, double volume, double gamma) {
  if (!(volume > 0.0)) throw DomainError("laplace_weight_grid: volume must be positive");
  WeightGrid wg;
  wg.xs = field.xs;
  wg.ys = field.ys;
  wg.gamma = gamma;
  wg.volume = volume;
  wg.mu = field.mu;
  wg.beta = field.beta;
  const std::size_t nx = wg.xs.size();
  const std::size_t ny = wg.ys.size();
  const auto ax = trapezoid(wg.xs, 0, nx - 1);
  const auto ay = trapezoid(wg.ys, 0, ny - 1);
  const double bv = field.beta * volume;

  std::vector<double> logs(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      logs[i * ny + j] = -bv * field.rate[i * ny + j] + gamma * (wg.xs[i] + wg.ys[j]) + std::log(ax[i] * ay[j]);
  wg.log_partition = log_sum_exp(logs);
  if (!std::isfinite(wg.log_partition)) {
    std::ostringstream msg;
    msg << "laplace_weight_grid: every weight underflows at V = " << volume
        << "; use a larger grid or a smaller volume";
    throw NumericError(msg.str());
  }
  wg.weights.resize(logs.size());
  wg.log_weights.resize(logs.size());
  double edge = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double lw = logs[i * ny + j] - wg.log_partition;
      const double w = std::exp(lw);
      wg.log_weights[i * ny + j] = lw;
      wg.weights[i * ny + j] = w;
      if (i == nx - 1 || j == ny - 1) edge += w;
    }
  if (edge > 1e-6) {
    std::ostringstream msg;
    msg << "laplace_weight_grid: mass " << edge << " on the outer grid edge at V = " << volume
        << "; enlarge x_max / y_max";
    throw NumericError(msg.str());
  }
  return wg;
}

WeightGrid laplace_weight_grid(double beta, double mu, double gamma, double volume, const GridSpec& spec,
                               const PotentialModel& model) {
  GridSpec s = spec;
  s.volumes = {volume};
  return laplace_weight_grid(peak_adapted_field(RateK(beta, mu, model), s), volume, gamma);
}

void assign_basins(WeightGrid& wg, double x_split) {
  const std::size_t ny = wg.ys.size();
  wg.basin.assign(wg.xs.size() * ny, 0);
  for (std::size_t i = 0; i < wg.xs.size(); ++i)
    if (wg.xs[i] >= x_split)
      for (std::size_t j = 0; j < ny; ++j) wg.basin[i * ny + j] = 1;
}

void assign_basins(WeightGrid& wg, const PhaseTransition& t) { assign_basins(wg, 0.5 * t.x_plus); }

namespace {

BasinMasses sum_basins(const WeightGrid& wg) {
  BasinMasses m;
  for (std::size_t k = 0; k < wg.weights.size(); ++k) (wg.basin[k] ? m.condensed : m.normal) += wg.weights[k];
  const double total = m.normal + m.condensed;
  m.normal /= total;
  m.condensed /= total;
  return m;
}

}  // namespace

BasinMasses basin_masses(WeightGrid& wg, const PhaseTransition& t) {
  if (wg.basin.size() != wg.weights.size()) assign_basins(wg, t);
  return sum_basins(wg);
}

BasinMasses basin_masses(WeightGrid& wg, double x_split) {
  assign_basins(wg, x_split);
  return sum_basins(wg);
}

Moments moments(const WeightGrid& wg) {
  Moments m;
  const std::size_t ny = wg.ys.size();
  for (std::size_t i = 0; i < wg.xs.size(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double w = wg.weights[i * ny + j];
      m.mean_x += w * wg.xs[i];
      m.mean_density += w * (wg.xs[i] + wg.ys[j]);
    }
  return m;
}

double log_mass(const WeightGrid& wg, const Rect& rect) {
  auto range = [](const std::vector<double>& a, double lo, double hi) {
    const auto first = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), lo) - a.begin());
    const auto last = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), hi) - a.begin());
    return std::pair{first, last == 0 ? std::size_t{0} : last - 1};
  };
  const auto [i0, i1] = range(wg.xs, rect.x_lo, rect.x_hi);
  const auto [j0, j1] = range(wg.ys, rect.y_lo, rect.y_hi);
  if (i0 >= wg.xs.size() || j0 >= wg.ys.size() || i1 <= i0 || j1 <= j0)
    return -std::numeric_limits<double>::infinity();
  const auto ax = trapezoid(wg.xs, 0, wg.xs.size() - 1);
  const auto ay = trapezoid(wg.ys, 0, wg.ys.size() - 1);
  const auto rx = trapezoid(wg.xs, i0, i1);
  const auto ry = trapezoid(wg.ys, j0, j1);
  const std::size_t ny = wg.ys.size();
  std::vector<double> logs;
  logs.reserve((i1 - i0 + 1) * (j1 - j0 + 1));
  for (std::size_t i = i0; i <= i1; ++i)
    for (std::size_t j = j0; j <= j1; ++j)
      logs.push_back(wg.log_weights[i * ny + j] + std::log(rx[i] * ry[j] / (ax[i] * ay[j])));
  return log_sum_exp(logs);
}

double min_rate_over(const RateK& rate, const Rect& rect) {
  if (!(rect.x_hi > rect.x_lo) || !(rect.y_hi > rect.y_lo)) throw DomainError("min_rate_over: empty rectangle");
  using boost::math::tools::brent_find_minima;
  constexpr int bits = 40;
  auto column_min = [&](double x) {
    auto f = [&](double y) { return rate(x, y); };
    std::uintmax_t iters = 200;
    const auto r = brent_find_minima(f, rect.y_lo, rect.y_hi, bits, iters);
    return std::min({r.second, f(rect.y_lo), f(rect.y_hi)});
  };
  constexpr int n = 48;
  std::vector<double> xs(n + 1);
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = rect.x_lo + (rect.x_hi - rect.x_lo) * i / n;
    vals[i] = column_min(xs[i]);
  }
  const auto best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  double out = vals[best];
  const double a = xs[std::max(best - 1, 0)];
  const double b = xs[std::min(best + 1, n)];
  std::uintmax_t iters = 200;
  const auto r = brent_find_minima(column_min, a, b, bits, iters);
  return std::min(out, r.second);
}

LdCheck ld_convergence_check(double beta, double mu, const std::vector<double>& volumes, const Rect& rect,
                             const PotentialModel& model, int n) {
  if (volumes.empty()) throw DomainError("ld_convergence_check: no volumes");
  const RateK rate(beta, mu, model);
  LdCheck out;
  out.target = -min_rate_over(rate, rect);

  const auto peaks = find_peaks(rate);
  const auto window = rate_window(beta, mu, model);
  const double x_max = std::max(window.x_max, rect.x_hi) * 1.25;
  double y_max = std::max(window.y_max, rect.y_hi) * 1.25;
  const double v_min = *std::min_element(volumes.begin(), volumes.end());
  for (const auto& p : peaks) y_max = std::max(y_max, p.y + 1.5 * std::sqrt(120.0 / (beta * v_min * p.kyy)));

  AxisSpec ax{0.0, x_max, n, {}, {0.0, x_max, rect.x_lo, rect.x_hi}, 0.3};
  AxisSpec ay{0.0, y_max, n, {}, {0.0, y_max, rect.y_lo, rect.y_hi}, 0.3};
  for (const auto& p : peaks) {
    ax.pinned.push_back(p.x);
    ay.pinned.push_back(p.y);
    for (double v : volumes) {
      const double bv = beta * v;
      const double wx = p.branch == Branch::normal ? 1.0 / (bv * p.kx) : 1.0 / std::sqrt(bv * p.kx);
      ax.foci.push_back({p.x, std::max(wx, 1e-12 * x_max)});
      ay.foci.push_back({p.y, 1.0 / std::sqrt(bv * p.kyy)});
    }
  }
  ax.foci.push_back({rect.x_lo, 0.02 * (rect.x_hi - rect.x_lo)});
  ay.foci.push_back({rect.y_lo, 0.02 * (rect.y_hi - rect.y_lo)});
  ay.foci.push_back({rect.y_hi, 0.02 * (rect.y_hi - rect.y_lo)});
  const auto field = tabulate_field(rate, graded_axis(ax), graded_axis(ay));
  for (double v : volumes) {
    const auto wg = laplace_weight_grid(field, v, 0.0);
    out.rows.push_back({v, log_mass(wg, rect) / (beta * v)});
  }
  return out;
}

double theta(WeightGrid& wg, const PhaseTransition& t) {
  const auto m = basin_masses(wg, t);
  return m.condensed / m.normal;
}

}  // namespace wibg
