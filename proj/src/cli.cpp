#include "wibg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "wibg/bog_pressure.hpp"
#include "wibg/errors.hpp"
#include "wibg/finite_volume.hpp"
#include "wibg/kac_mixture.hpp"
#include "wibg/parallel.hpp"
#include "wibg/rates.hpp"
#include "wibg/variational.hpp"

namespace wibg {

namespace {

using ojson = nlohmann::ordered_json;

struct KeySpec {
  const char* name;
  const char* section;
  const char* fallback;  // nullptr: no default
  const char* help;
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> keys{
      {"family", "potential", "gaussian", "gaussian | flat_cutoff | rational"},
      {"lambda0", "potential", nullptr, "lambda(0) > 0 (required)"},
      {"shape", "potential", "1", "sigma (gaussian, rational) or kc (flat_cutoff)"},
      {"beta", "physics", nullptr, "inverse temperature"},
      {"mu", "physics", nullptr, "chemical potential (rate-dump)"},
      {"rho", "physics", nullptr, "density, or 'midpoint' of the plateau"},
      {"alpha", "physics", "-1", "alpha values: a,b,c or lo:hi:n"},
      {"x", "physics", "0", "condensate values: a,b,c or lo:hi:n"},
      {"mu-min", "physics", "-1", "phase-diagram sweep start"},
      {"mu-max", "physics", "1", "phase-diagram sweep end"},
      {"mu-points", "physics", "81", "phase-diagram sweep size"},
      {"rho-min", "physics", nullptr, "condensate-curve start (default rho_- / 2)"},
      {"rho-max", "physics", nullptr, "condensate-curve end (default 2 rho_+)"},
      {"rho-points", "physics", "200", "condensate-curve sweep size"},
      {"gamma", "physics", nullptr, "kac-sim tilt (default gamma_rho on the plateau, else 0)"},
      {"rel-tol", "numerics", "1e-12", "quadrature relative tolerance"},
      {"zero-tol", "numerics", "1e-8", "rate value accepted as a zero"},
      {"nx", "numerics", "128", "rate-dump x nodes"},
      {"ny", "numerics", "128", "rate-dump y nodes"},
      {"grid-n", "numerics", "512", "kac-sim nodes per axis"},
      {"volumes", "numerics", "1e2,1e3,1e4,1e5", "kac-sim volume sweep"},
      {"box-sides", "numerics", "8,16,32,64", "lattice-check box sides"},
      {"k-cutoff", "numerics", "0", "lattice-check momentum cutoff (0 = automatic)"},
      {"format", "output", "csv", "csv | json"},
      {"output", "output", "-", "output file ('-' = stdout)"},
      {"schema-dir", "output", nullptr, "directory receiving <subcommand>.schema.json"},
  };
  return keys;
}

struct Column {
  const char* name;
  const char* unit;
  const char* description;
};

const std::map<std::string, std::pair<std::string, std::vector<Column>>>& schemas() {
  static const std::map<std::string, std::pair<std::string, std::vector<Column>>> s{
      {"validate-potential",
       {"Admissibility report for the interaction profile",
        {{"quantity", "-", "report field"}, {"value", "-", "field value"}}}},
      {"pressure",
       {"Bogoliubov pressure on an (alpha, x) grid",
        {{"beta", "1/energy", "inverse temperature"},
         {"alpha", "energy", "shifted chemical potential"},
         {"x", "1/volume", "condensate density"},
         {"p0B", "energy/volume", "Bogoliubov pressure"},
         {"dp0B_dalpha", "1/volume", "alpha derivative of p0B"},
         {"depletion", "1/volume", "out-of-condensate density"}}}},
      {"phase-diagram",
       {"Density and condensate along a mu sweep; two rows at the transition",
        {{"mu", "energy", "chemical potential"},
         {"rho", "1/volume", "particle density"},
         {"x", "1/volume", "condensate density"},
         {"branch", "-", "normal | condensed"},
         {"pressure", "energy/volume", "grand-canonical pressure"}}}},
      {"condensate-curve",
       {"Chemical potential and condensate along a density sweep",
        {{"rho", "1/volume", "particle density"},
         {"mu", "energy", "chemical potential mu_rho"},
         {"x", "1/volume", "condensate density x(rho)"}}}},
      {"rate-dump",
       {"Rate function on a grid: K_mu(x, y) when mu is given, D_rho(x) when rho is given",
        {{"x", "1/volume", "condensate density"},
         {"y", "1/volume", "depletion density (K only)"},
         {"K", "energy/volume", "rate K_mu(x, y) (or D for the rho form)"}}}},
      {"mixture",
       {"Limiting two-peak law at density rho (JSON object)",
        {{"weights", "-", "normal and condensed weights"},
         {"peaks", "1/volume", "(x, y) of each atom"},
         {"kappa", "-", "lever-rule fraction, null off the plateau"},
         {"gamma", "-", "tilt reproducing kappa, null unless strictly inside the plateau"},
         {"xi", "-", "normal weight at that tilt"}}}},
      {"kac-sim",
       {"Laplace-surrogate basin masses and moments over a volume sweep",
        {{"V", "volume", "box volume"},
         {"mass_normal", "-", "mass with x below the basin split"},
         {"mass_condensed", "-", "mass with x above the basin split"},
         {"mean_x", "1/volume", "E[x]"},
         {"mean_density", "1/volume", "E[x + y]"}}}},
      {"lattice-check",
       {"Finite-box momentum sum against the integral",
        {{"alpha", "energy", "shifted chemical potential"},
         {"x", "1/volume", "condensate density"},
         {"L", "length", "box side"},
         {"lattice_p0B", "energy/volume", "momentum-lattice sum"},
         {"integral", "energy/volume", "infinite-volume p0B"},
         {"error", "energy/volume", "lattice_p0B - integral"}}}},
  };
  return s;
}

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

// ---- value parsing -------------------------------------------------------

double to_double(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (text.empty() || end == begin || *end != '\0' || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text, int min_value) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || v < min_value || v > 1e8)
    throw ConfigError(key, "expected an integer >= " + std::to_string(min_value) + ", got '" + text + "'");
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '[' && c != ']' && c != '"') {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> to_values(const std::string& key, const std::string& text) {
  const auto range = split(text, ':');
  if (range.size() == 3) {
    const double lo = to_double(key, range[0]);
    const double hi = to_double(key, range[1]);
    const int n = to_int(key, range[2], 1);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
  }
  if (range.size() != 1) throw ConfigError(key, "expected a,b,c or lo:hi:n, got '" + text + "'");
  std::vector<double> v;
  for (const auto& p : split(text, ',')) v.push_back(to_double(key, p));
  return v;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// ---- subcommands ---------------------------------------------------------

double require_beta(const RunConfig& cfg) {
  if (!cfg.physics.beta) throw ConfigError("beta", "required by " + cfg.subcommand);
  return *cfg.physics.beta;
}

Table run_validate(const RunConfig& cfg, int& status) {
  const auto report = validate(cfg.model());
  Table t;
  t.columns = {"quantity", "value"};
  t.rows.push_back({std::string("family"), std::string(to_string(cfg.potential.family))});
  t.rows.push_back({std::string("lambda0"), cfg.potential.lambda0});
  t.rows.push_back({std::string("shape"), cfg.potential.shape});
  t.rows.push_back({std::string("valid"), std::string(report.valid ? "true" : "false")});
  t.rows.push_back({std::string("tail_decay_exponent"), report.tail_decay_exponent});
  t.rows.push_back({std::string("k2_lambda_integrable"), std::string(report.k2_lambda_integrable ? "true" : "false")});
  t.rows.push_back({std::string("k2_lambda_squared_integrable"),
                    std::string(report.k2_lambda_squared_integrable ? "true" : "false")});
  for (std::size_t i = 0; i < report.k2_lambda_squared_partials.size(); ++i)
    t.rows.push_back({"k2_lambda_squared_partial_" + std::to_string(i), report.k2_lambda_squared_partials[i]});
  if (report.offending_k) t.rows.push_back({std::string("offending_k"), *report.offending_k});
  for (const auto& w : report.warnings) t.rows.push_back({std::string("warning"), w});
  for (const auto& e : report.errors) t.rows.push_back({std::string("error"), e});
  status = report.valid ? 0 : 2;
  return t;
}

Table run_pressure(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  std::vector<std::pair<double, double>> points;
  for (double a : cfg.physics.alpha)
    for (double x : cfg.physics.x) {
      if (a > 0.0) throw ConfigError("alpha", "values must be <= 0");
      if (x < 0.0) throw ConfigError("x", "values must be >= 0");
      points.emplace_back(a, x);
    }
  std::vector<std::vector<Cell>> rows(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const ThermoPoint pt{beta, points[i].first, points[i].second};
    const auto b = bogoliubov_integrals(pt, model, channel::pressure | channel::depletion, cfg.numerics.rel_tol);
    const double dep = b.thermal_depletion + b.quantum_depletion;
    const double p = pt.alpha * pt.x + b.thermal_pressure + b.vacuum_pressure;
    rows[i] = {beta, pt.alpha, pt.x, p, pt.x + dep, dep};
  });
  Table t;
  t.columns = {"beta", "alpha", "x", "p0B", "dp0B_dalpha", "depletion"};
  t.rows = std::move(rows);
  return t;
}

Table run_phase_diagram(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  const auto& ph = cfg.physics;
  std::vector<DensityResult> results(ph.mu_points);
  parallel_for(results.size(), [&](std::size_t i) {
    const double mu = ph.mu_points == 1 ? ph.mu_min : ph.mu_min + (ph.mu_max - ph.mu_min) * i / (ph.mu_points - 1);
    results[i] = density_of_mu(beta, mu, model);
  });
  Table t;
  t.columns = {"mu", "rho", "x", "branch", "pressure"};
  for (const auto& r : results)
    for (const auto& s : r.branches)
      t.rows.push_back({s.mu, s.rho, s.x_star, std::string(to_string(s.branch)), s.pressure});
  return t;
}

std::string transition_note(const std::optional<PhaseTransition>& t) {
  std::ostringstream s;
  if (!t) return "transition none";
  s << "transition mu_c = " << format_number(t->mu_c) << ", rho_minus = " << format_number(t->rho_minus)
    << ", rho_plus = " << format_number(t->rho_plus) << ", x_plus = " << format_number(t->x_plus);
  return s.str();
}

Table run_condensate_curve(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  const auto& ph = cfg.physics;
  const auto transition = find_transition(beta, model);
  double lo = 0.0;
  double hi = 0.0;
  if (ph.rho_min) lo = *ph.rho_min;
  else if (transition) lo = 0.5 * transition->rho_minus;
  else throw ConfigError("rho-min", "required when there is no transition");
  if (ph.rho_max) hi = *ph.rho_max;
  else if (transition) hi = 2.0 * transition->rho_plus;
  else throw ConfigError("rho-max", "required when there is no transition");
  if (!(lo > 0.0)) throw ConfigError("rho-min", "must be positive");
  if (!(hi >= lo)) throw ConfigError("rho-max", "must be >= rho-min");
  const int n = ph.rho_points;
  std::vector<std::vector<Cell>> rows(n);
  parallel_for(rows.size(), [&](std::size_t i) {
    const double rho = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    const double mu = mu_of_rho(beta, rho, model, transition);
    const double x = condensate_of_rho(beta, rho, model, transition);
    rows[i] = {rho, mu, x};
  });
  Table t;
  t.columns = {"rho", "mu", "x"};
  t.rows = std::move(rows);
  t.notes.push_back(transition_note(transition));
  return t;
}

std::optional<PhaseTransition> transition_for_rho(double beta, const PotentialModel& model) {
  return find_transition(beta, model);
}

double resolve_rho(const RunConfig& cfg, const std::optional<PhaseTransition>& t) {
  if (cfg.physics.rho_midpoint) {
    if (!t) throw ConfigError("rho", "'midpoint' needs a transition, and none was found");
    return 0.5 * (t->rho_minus + t->rho_plus);
  }
  if (!cfg.physics.rho) throw ConfigError("rho", "required by " + cfg.subcommand);
  if (!(*cfg.physics.rho > 0.0)) throw ConfigError("rho", "must be positive");
  return *cfg.physics.rho;
}

void add_minimizer_notes(Table& t, const RateGrid& grid, bool two_d) {
  for (const auto& m : grid.minimizers) {
    std::ostringstream s;
    s << "zero x = " << format_number(m.x);
    if (two_d) s << ", y = " << format_number(m.y);
    s << ", rate = " << format_number(m.value);
    t.notes.push_back(s.str());
  }
}

Table run_rate_dump(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  const bool has_rho = cfg.physics.rho || cfg.physics.rho_midpoint;
  if (cfg.physics.mu && has_rho) throw ConfigError("mu", "give exactly one of mu and rho");
  if (!cfg.physics.mu && !has_rho) throw ConfigError("mu", "give exactly one of mu and rho");
  Table t;
  if (cfg.physics.mu) {
    const RateK rate(beta, *cfg.physics.mu, model);
    const auto window = rate_window(beta, *cfg.physics.mu, model);
    const auto grid = tabulate_K(rate, window, cfg.numerics.nx, cfg.numerics.ny, cfg.numerics.zero_tol);
    t.columns = {"x", "y", "K"};
    for (std::size_t i = 0; i < grid.xs.size(); ++i)
      for (std::size_t j = 0; j < grid.ys.size(); ++j)
        t.rows.push_back({grid.xs[i], grid.ys[j], RateGrid::reported(grid.at(i, j))});
    add_minimizer_notes(t, grid, true);
    return t;
  }
  const auto transition = transition_for_rho(beta, model);
  const double rho = resolve_rho(cfg, transition);
  const RateD rate(beta, rho, model, transition);
  const double x_max = std::max(rate_window(beta, rate.mu(), model).x_max, 1.25 * rate.x_rho());
  const auto grid = tabulate_D(rate, x_max, cfg.numerics.nx, cfg.numerics.zero_tol);
  t.columns = {"x", "D"};
  for (std::size_t i = 0; i < grid.xs.size(); ++i) t.rows.push_back({grid.xs[i], RateGrid::reported(grid.at(i))});
  t.notes.push_back("mu_rho = " + format_number(rate.mu()));
  add_minimizer_notes(t, grid, false);
  return t;
}

ojson run_mixture(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  const auto transition = transition_for_rho(beta, model);
  const double rho = resolve_rho(cfg, transition);
  const auto law = limit_measure(beta, rho, model, transition);
  ojson j;
  j["rho"] = rho;
  j["weights"] = {{"normal", law.weight_normal}, {"condensed", law.weight_condensed}};
  j["peaks"] = {{"normal", {{"x", law.peak_normal.x}, {"y", law.peak_normal.y}}},
                {"condensed", {{"x", law.peak_condensed.x}, {"y", law.peak_condensed.y}}}};
  j["uniform_phase"] = law.uniform_phase;
  j["kappa"] = nullptr;
  j["gamma"] = nullptr;
  j["xi"] = nullptr;
  if (transition && rho >= transition->rho_minus && rho <= transition->rho_plus) {
    j["kappa"] = kappa(rho, *transition);
    if (rho > transition->rho_minus && rho < transition->rho_plus) {
      const double g = gamma_of_rho(rho, *transition);
      j["gamma"] = g;
      j["xi"] = xi(g, *transition);
    }
  }
  if (transition)
    j["transition"] = {{"mu_c", transition->mu_c},
                       {"rho_minus", transition->rho_minus},
                       {"rho_plus", transition->rho_plus},
                       {"x_plus", transition->x_plus},
                       {"y_plus", transition->y_plus}};
  else
    j["transition"] = nullptr;
  return j;
}

Table run_kac_sim(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  const auto transition = transition_for_rho(beta, model);
  const double rho = resolve_rho(cfg, transition);
  for (double v : cfg.numerics.volumes)
    if (!(v > 0.0)) throw ConfigError("volumes", "values must be positive");

  double mu = 0.0;
  double gamma = 0.0;
  double split = std::numeric_limits<double>::infinity();
  if (transition && rho > transition->rho_minus && rho < transition->rho_plus) {
    mu = transition->mu_c;
    gamma = cfg.physics.gamma ? *cfg.physics.gamma : gamma_of_rho(rho, *transition);
  } else {
    mu = mu_of_rho(beta, rho, model, transition);
    gamma = cfg.physics.gamma.value_or(0.0);
  }
  if (transition) {
    split = 0.5 * transition->x_plus;
  } else {
    const double x = condensate_of_rho(beta, rho, model, transition);
    if (x > 0.0) split = 0.5 * x;
  }

  GridSpec spec;
  spec.nx = cfg.numerics.grid_n;
  spec.ny = cfg.numerics.grid_n;
  spec.volumes = cfg.numerics.volumes;
  const auto field = peak_adapted_field(RateK(beta, mu, model), spec);

  Table t;
  t.columns = {"V", "mass_normal", "mass_condensed", "mean_x", "mean_density"};
  t.notes.push_back("mu = " + format_number(mu) + ", gamma = " + format_number(gamma) +
                    ", basin split x = " + format_number(split));
  t.notes.push_back(transition_note(transition));
  for (double v : cfg.numerics.volumes) {
    auto wg = laplace_weight_grid(field, v, gamma);
    const auto masses = basin_masses(wg, split);
    const auto m = moments(wg);
    t.rows.push_back({v, masses.normal, masses.condensed, m.mean_x, m.mean_density});
  }
  return t;
}

Table run_lattice_check(const RunConfig& cfg) {
  const double beta = require_beta(cfg);
  const auto model = cfg.model();
  for (double a : cfg.physics.alpha)
    if (a > 0.0) throw ConfigError("alpha", "values must be <= 0");
  for (double x : cfg.physics.x)
    if (x < 0.0) throw ConfigError("x", "values must be >= 0");
  for (double l : cfg.numerics.box_sides)
    if (!(l > 0.0)) throw ConfigError("box-sides", "values must be positive");
  if (cfg.numerics.k_cutoff < 0.0) throw ConfigError("k-cutoff", "must be >= 0");

  struct Job {
    double alpha, x, side;
  };
  std::vector<Job> jobs;
  for (double a : cfg.physics.alpha)
    for (double x : cfg.physics.x)
      for (double l : cfg.numerics.box_sides) jobs.push_back({a, x, l});
  std::vector<std::vector<Cell>> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto& j = jobs[i];
    const double lat = lattice_p0B(beta, j.alpha, j.x, model, {j.side, cfg.numerics.k_cutoff});
    const double ref = p0B({beta, j.alpha, j.x}, model);
    rows[i] = {j.alpha, j.x, j.side, lat, ref, lat - ref};
  });
  Table t;
  t.columns = {"alpha", "x", "L", "lattice_p0B", "integral", "error"};
  t.rows = std::move(rows);
  return t;
}

// ---- output --------------------------------------------------------------

ojson config_json(const RunConfig& cfg) {
  ojson c;
  c["subcommand"] = cfg.subcommand;
  for (const auto& [k, v] : cfg.resolved) c[k] = v;
  return c;
}

void write_header(std::ostream& os, const RunConfig& cfg, const std::vector<std::string>& notes) {
  os << "# wibg " << cfg.subcommand << "\n";
  for (const auto& [k, v] : cfg.resolved) os << "# " << k << " = " << v << "\n";
  if (!cfg.output.deterministic) os << "# generated " << timestamp() << "\n";
  for (const auto& n : notes) os << "# " << n << "\n";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

void write_table(std::ostream& os, const RunConfig& cfg, const Table& t) {
  if (cfg.output.format == "json") {
    ojson j;
    j["config"] = config_json(cfg);
    if (!cfg.output.deterministic) j["generated"] = timestamp();
    j["notes"] = t.notes;
    j["columns"] = t.columns;
    j["rows"] = ojson::array();
    for (const auto& r : t.rows) {
      ojson row = ojson::array();
      for (const auto& c : r) {
        if (const auto* d = std::get_if<double>(&c)) row.push_back(*d);
        else row.push_back(std::get<std::string>(c));
      }
      j["rows"].push_back(row);
    }
    os << j.dump(2) << "\n";
    return;
  }
  write_header(os, cfg, t.notes);
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
    os << "\n";
  }
}

void write_object(std::ostream& os, const RunConfig& cfg, const ojson& body) {
  if (cfg.output.format == "json") {
    ojson j;
    j["config"] = config_json(cfg);
    if (!cfg.output.deterministic) j["generated"] = timestamp();
    for (const auto& [k, v] : body.items()) j[k] = v;
    os << j.dump(2) << "\n";
    return;
  }
  write_header(os, cfg, {});
  os << "key,value\n";
  for (const auto& [k, v] : body.flatten().items()) {
    os << k << ",";
    if (v.is_number()) os << format_number(v.get<double>());
    else if (v.is_null()) os << "";
    else if (v.is_boolean()) os << (v.get<bool>() ? "true" : "false");
    else os << v.get<std::string>();
    os << "\n";
  }
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"validate-potential", "pressure", "phase-diagram", "condensate-curve",
                                              "rate-dump",          "mixture",  "kac-sim",       "lattice-check"};
  return names;
}

std::string schema_json(const std::string& subcommand) {
  const auto it = schemas().find(subcommand);
  if (it == schemas().end()) throw ConfigError("subcommand", "unknown subcommand '" + subcommand + "'");
  ojson j;
  j["subcommand"] = subcommand;
  j["description"] = it->second.first;
  j["units"] = "hbar^2 / 2m = 1, k_B = 1; energies, lengths and volumes are dimensionless";
  j["columns"] = ojson::array();
  for (const auto& c : it->second.second)
    j["columns"].push_back({{"name", c.name}, {"unit", c.unit}, {"description", c.description}});
  return j.dump(2) + "\n";
}

PotentialModel RunConfig::model() const {
  return PotentialModel(potential.family, potential.lambda0, potential.shape);
}

namespace {

struct ParsedArgs {
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, bool> given;
  bool deterministic = false;
  std::string subcommand;
};

void build_app(CLI::App& app, ParsedArgs& args) {
  app.set_config("--config", "", "flat key = value file; command-line values override it");
  app.fallthrough();
  for (const auto& k : key_specs())
    app.add_option(std::string("--") + k.name, args.values[k.name], k.help)->delimiter(',')->expected(1, 1 << 20);
  app.add_flag("--deterministic", args.deterministic, "omit the timestamp from output headers");
  for (const auto& name : subcommands())
    app.add_subcommand(name, schemas().at(name).first)->fallthrough();
  app.require_subcommand(1);
}

RunConfig resolve(CLI::App& app, ParsedArgs& args) {
  RunConfig cfg;
  cfg.subcommand = app.get_subcommands().front()->get_name();
  cfg.output.deterministic = args.deterministic;

  auto given = [&](const std::string& key) { return app.get_option("--" + key)->count() > 0; };
  auto text = [&](const std::string& key) -> std::optional<std::string> {
    if (given(key)) {
      std::string joined;
      for (const auto& part : args.values[key]) joined += (joined.empty() ? "" : ",") + part;
      return joined;
    }
    for (const auto& k : key_specs())
      if (key == k.name && k.fallback) return std::string(k.fallback);
    return std::nullopt;
  };
  for (const auto& k : key_specs()) {
    const auto v = text(k.name);
    cfg.resolved.emplace_back(k.name, v ? *v : "");
  }
  cfg.resolved.emplace_back("deterministic", args.deterministic ? "true" : "false");

  // potential
  const auto family = parse_family(*text("family"));
  if (!family) throw ConfigError("family", "unknown family '" + *text("family") + "'");
  cfg.potential.family = *family;
  const auto l0 = text("lambda0");
  if (!l0) throw ConfigError("lambda0", "missing required key (potential section)");
  cfg.potential.lambda0 = to_double("lambda0", *l0);
  if (!(cfg.potential.lambda0 > 0.0)) throw ConfigError("lambda0", "must be positive");
  cfg.potential.shape = to_double("shape", *text("shape"));
  if (!(cfg.potential.shape > 0.0)) throw ConfigError("shape", "must be positive");

  // physics
  auto& ph = cfg.physics;
  if (auto v = text("beta")) {
    ph.beta = to_double("beta", *v);
    if (!(*ph.beta > 0.0)) throw ConfigError("beta", "must be positive");
  }
  if (auto v = text("mu")) ph.mu = to_double("mu", *v);
  if (auto v = text("rho")) {
    if (*v == "midpoint") ph.rho_midpoint = true;
    else ph.rho = to_double("rho", *v);
  }
  ph.alpha = to_values("alpha", *text("alpha"));
  ph.x = to_values("x", *text("x"));
  ph.mu_min = to_double("mu-min", *text("mu-min"));
  ph.mu_max = to_double("mu-max", *text("mu-max"));
  if (ph.mu_max < ph.mu_min) throw ConfigError("mu-max", "must be >= mu-min");
  ph.mu_points = to_int("mu-points", *text("mu-points"), 1);
  if (auto v = text("rho-min")) ph.rho_min = to_double("rho-min", *v);
  if (auto v = text("rho-max")) ph.rho_max = to_double("rho-max", *v);
  ph.rho_points = to_int("rho-points", *text("rho-points"), 1);
  if (auto v = text("gamma")) ph.gamma = to_double("gamma", *v);

  // numerics
  auto& nu = cfg.numerics;
  nu.rel_tol = to_double("rel-tol", *text("rel-tol"));
  if (!(nu.rel_tol > 0.0)) throw ConfigError("rel-tol", "must be positive");
  nu.zero_tol = to_double("zero-tol", *text("zero-tol"));
  if (!(nu.zero_tol > 0.0)) throw ConfigError("zero-tol", "must be positive");
  nu.nx = to_int("nx", *text("nx"), 2);
  nu.ny = to_int("ny", *text("ny"), 2);
  nu.grid_n = to_int("grid-n", *text("grid-n"), 8);
  nu.volumes = to_values("volumes", *text("volumes"));
  nu.box_sides = to_values("box-sides", *text("box-sides"));
  nu.k_cutoff = to_double("k-cutoff", *text("k-cutoff"));

  // output
  cfg.output.format = *text("format");
  if (cfg.output.format != "csv" && cfg.output.format != "json")
    throw ConfigError("format", "expected csv or json, got '" + cfg.output.format + "'");
  if (cfg.subcommand == "mixture" && !given("format")) cfg.output.format = "json";
  for (auto& [k, v] : cfg.resolved)
    if (k == "format") v = cfg.output.format;
  cfg.output.path = *text("output");
  if (auto v = text("schema-dir")) cfg.output.schema_dir = *v;
  return cfg;
}

}  // namespace

RunConfig parse_run_config(int argc, const char* const* argv) {
  CLI::App app{"Weakly imperfect Bose gas solver"};
  ParsedArgs args;
  build_app(app, args);
  app.parse(argc, argv);
  return resolve(app, args);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly imperfect Bose gas solver"};
  ParsedArgs args;
  build_app(app, args);
  RunConfig cfg;
  try {
    app.parse(argc, argv);
    cfg = resolve(app, args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }

  if (cfg.subcommand != "validate-potential") {
    const auto report = validate(cfg.model());
    if (!report.valid) {
      for (const auto& e : report.errors) err << "config error: potential: " << e << "\n";
      return 2;
    }
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  }

  int status = 0;
  std::ostringstream body;
  try {
    const auto& sub = cfg.subcommand;
    if (sub == "mixture") {
      write_object(body, cfg, run_mixture(cfg));
    } else {
      Table t;
      if (sub == "validate-potential") t = run_validate(cfg, status);
      else if (sub == "pressure") t = run_pressure(cfg);
      else if (sub == "phase-diagram") t = run_phase_diagram(cfg);
      else if (sub == "condensate-curve") t = run_condensate_curve(cfg);
      else if (sub == "rate-dump") t = run_rate_dump(cfg);
      else if (sub == "kac-sim") t = run_kac_sim(cfg);
      else t = run_lattice_check(cfg);
      write_table(body, cfg, t);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 3;
  }

  if (cfg.output.path == "-") {
    out << body.str();
  } else {
    std::ofstream f(cfg.output.path);
    if (!f) {
      err << "config error: output: cannot open '" << cfg.output.path << "'\n";
      return 2;
    }
    f << body.str();
  }
  if (!cfg.output.schema_dir.empty()) {
    const std::string path = cfg.output.schema_dir + "/" + cfg.subcommand + ".schema.json";
    std::error_code ec;
    std::filesystem::create_directories(cfg.output.schema_dir, ec);
    std::ofstream f(path);
    if (!f) {
      err << "config error: schema-dir: cannot write '" << path << "'\n";
      return 2;
    }
    f << schema_json(cfg.subcommand);
  }
  if (status == 2) err << "config error: potential failed validation\n";
  return status;
}

}  // namespace wibg
