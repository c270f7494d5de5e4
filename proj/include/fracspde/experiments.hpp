#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "fracspde/config.hpp"
#include "fracspde/existence.hpp"
#include "fracspde/montecarlo.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/potential.hpp"
#include "fracspde/temporal.hpp"
#include "fracspde/version.hpp"

namespace fracspde {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunResult {
  std::vector<Table> tables;
  json summary = json::object();
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

inline std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_cell(row[i]);
    s += "\n";
  }
  return s;
}

inline json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const auto* d = std::get_if<double>(&row[i])) r[t.columns[i]] = std::isfinite(*d) ? json(*d) : json(format_double(*d));
      else if (const auto* n = std::get_if<long long>(&row[i])) r[t.columns[i]] = *n;
      else r[t.columns[i]] = std::get<std::string>(row[i]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace detail {

inline void check_finite(const Table& t, const std::string& op, bool allow_inf = false) {
  for (const auto& row : t.rows)
    for (const auto& c : row)
      if (const auto* d = std::get_if<double>(&c); d && (std::isnan(*d) || (!allow_inf && std::isinf(*d))))
        throw numeric_error(op + " produced a non-finite value");
}

inline std::vector<double> grid_numbers(const ExperimentConfig& c, const std::string& key, std::vector<double> fallback) {
  Diagnostics dg;
  auto v = get_numbers(c.grid, key, "grid", dg, std::move(fallback));
  if (!dg.ok()) throw config_error(dg.joined());
  return v;
}

inline double grid_number(const ExperimentConfig& c, const std::string& key, double fallback) {
  Diagnostics dg;
  double v = get_number(c.grid, key, "grid", dg, fallback);
  if (!dg.ok()) throw config_error(dg.joined());
  return v;
}

inline std::string problem_name(Problem p) { return to_string(p); }

struct Built {
  CharacteristicExponent exp;
  SpectralMeasure mu;
  std::optional<Kernel> kernel;
};

inline Built build_all(const ExperimentConfig& c) {
  Diagnostics dg;
  auto e = build_exponent(c.process, c.dim, dg);
  auto mu = build_measure(c.measure, c.dim, dg);
  auto k = build_kernel(c.kernel, c.dim, dg);
  if (!dg.ok()) throw config_error(dg.joined());
  if (!k) k = partner_kernel(mu);
  return {e, mu, k};
}

inline std::string mesh_tag(const ExperimentConfig& c) {
  return "r" + std::to_string(c.plan.radial_nodes) + "a" + std::to_string(c.plan.angular_nodes) + "s" +
         std::to_string(c.plan.outer_shells) + "t" + std::to_string(c.time_nodes);
}

// Least-squares slope of log y on log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace detail

inline RunResult run_existence_scan(const ExperimentConfig& c, const std::string& hash, int workers) {
  const auto base = detail::build_all(c);
  const std::string ptype = c.process.value("type", "stable");
  const std::string mtype = c.measure.value("type", "riesz");
  auto beta0 = base.exp.stable_parameters();
  auto betas = detail::grid_numbers(c, "beta", {beta0 ? beta0->first : 2.0});
  std::vector<double> alphas{0.0};
  if (mtype == "riesz") alphas = detail::grid_numbers(c, "alpha", {c.measure.value("alpha", 0.5)});
  auto hs = detail::grid_numbers(c, "H", {c.H});
  const double margin = detail::grid_number(c, "margin", 0.1);
  struct Job {
    double beta, alpha, H;
    Problem p;
  };
  std::vector<Job> jobs;
  for (double b : betas)
    for (double a : alphas)
      for (double h : hs)
        for (Problem p : c.problems) jobs.push_back({b, a, h, p});
  Table t{"existence", {"config_hash", "mesh", "beta", "alpha", "H", "problem", "closed_form_lhs", "closed_form_rhs",
                        "verdict", "numeric_verdict", "integral", "in_margin_band"}, {}};
  t.rows.resize(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& j = jobs[i];
    const double cst = c.process.value("c", 1.0);
    auto e = ptype == "brownian" ? CharacteristicExponent::brownian(c.dim, c.process.value("scale", 1.0))
                                 : CharacteristicExponent::stable(c.dim, j.beta, cst);
    auto mu = mtype == "riesz" ? SpectralMeasure::riesz(c.dim, j.alpha) : base.mu;
    auto r = existence_verdict(e, mu, HurstParams(j.H, 0), j.p, c.plan);
    const double lhs = r.closed_form ? r.closed_form->lhs : std::nan("");
    const double rhs = r.closed_form ? r.closed_form->rhs : std::nan("");
    t.rows[i] = {hash, detail::mesh_tag(c), j.beta, j.alpha, j.H, to_string(j.p), lhs, rhs, std::string(to_string(r.verdict)),
                 std::string(to_string(r.numeric_verdict)), r.integral.value,
                 (long long)(r.closed_form && std::abs(lhs - rhs) < margin)};
  });
  RunResult out;
  std::size_t disagree = 0, in_band = 0;
  for (const auto& row : t.rows) {
    if (std::get<long long>(row[11])) {
      ++in_band;
      continue;
    }
    if (std::get<std::string>(row[8]) != std::get<std::string>(row[9])) ++disagree;
  }
  out.summary = {{"rows", t.rows.size()}, {"margin", margin}, {"rows_in_margin_band", in_band},
                 {"disagreements_outside_band", disagree}};
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_nt_scan(const ExperimentConfig& c, const std::string& hash, int workers) {
  const auto b = detail::build_all(c);
  const HurstParams hp(c.H, 0);
  auto ts = detail::grid_numbers(c, "t", {0.25, 1.0, 4.0});
  auto rs = detail::grid_numbers(c, "radius", {0.0, 0.1, 1.0, 10.0});
  auto pts = axis_grid(c.dim, ts, rs);
  struct Job {
    GridPoint g;
    Problem p;
  };
  std::vector<Job> jobs;
  for (Problem p : c.problems)
    for (const auto& g : pts) jobs.push_back({g, p});
  Table t{"nt", {"config_hash", "mesh", "problem", "t", "radius", "psi_re", "psi_im", "nt", "abs_error_estimate"}, {}};
  t.rows.resize(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& j = jobs[i];
    const cplx psi = b.exp(j.g.xi);
    auto r = nt(VarianceKernelQuery{j.g.t, j.g.xi, j.p, hp, b.exp});
    t.rows[i] = {hash, detail::mesh_tag(c), to_string(j.p), j.g.t, norm2(j.g.xi), psi.real(), psi.imag(), r.value,
                 r.abs_error_estimate};
  });
  RunResult out;
  out.summary = {{"rows", t.rows.size()}};
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_bounds_verify(const ExperimentConfig& c, const std::string& hash, int) {
  const auto b = detail::build_all(c);
  const HurstParams hp(c.H);
  auto ts = detail::grid_numbers(c, "t", {0.25, 1.0, 4.0});
  auto rs = detail::grid_numbers(c, "radius", {0.1, 1.0, 10.0});
  auto pts = axis_grid(c.dim, ts, rs);
  double K = detail::grid_number(c, "K", -1.0);
  if (K < 0.0) {
    auto probe = probe_grid(c.dim, 1e-2, 1e2, 9);
    auto est = estimate_im_re_ratio(b.exp, probe);
    if (!est.bound) throw numeric_error("bounds_verify: Im/Re ratio unbounded on the probe grid");
    K = *est.bound;
  }
  Table t{"bounds", {"config_hash", "mesh", "problem", "t", "radius", "nt", "ratio", "lower_constant", "upper_constant",
                     "lower_ok", "upper_ok"}, {}};
  RunResult out;
  out.summary = json::object();
  for (Problem p : c.problems) {
    BoundsReport rep = p == Problem::parabolic ? verify_parabolic_bounds(b.exp, hp, K, pts) : verify_hyperbolic_bounds(b.exp, hp, pts);
    for (const auto& r : rep.rows)
      t.rows.push_back({hash, detail::mesh_tag(c), to_string(p), r.t, norm2(r.xi), r.nt, r.ratio, r.lower, r.upper,
                        (long long)r.lower_ok, (long long)r.upper_ok});
    out.summary[to_string(p)] = {{"all_pass", rep.all_pass}, {"min_ratio", rep.min_ratio}, {"max_ratio", rep.max_ratio},
                                 {"caveat", rep.caveat}};
  }
  out.summary["K"] = K;
  out.summary["b_H_estimate"] = hp.b_H;
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_max_principle(const ExperimentConfig& c, const std::string& hash, int workers) {
  const auto b = detail::build_all(c);
  if (!b.kernel) throw config_error("noise.kernel: no pointwise kernel for this measure");
  const HurstParams hp(c.H, 0);
  const double alpha = detail::grid_number(c, "alpha", 1.0);
  std::vector<std::vector<double>> xs;
  if (c.grid.contains("x") && c.grid["x"].is_array()) {
    for (const auto& x : c.grid["x"]) {
      if (x.is_number() && c.dim == 1) xs.push_back({x.get<double>()});
      else if (x.is_array() && int(x.size()) == c.dim) xs.push_back(x.get<std::vector<double>>());
      else throw config_error("grid.x: each entry must be a point of dimension " + std::to_string(c.dim));
    }
  } else {
    for (double v : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
      std::vector<double> x(c.dim, 0.0);
      x[0] = v;
      xs.push_back(x);
    }
  }
  const std::string m = c.grid.value("method", "monte_carlo");
  if (m != "monte_carlo" && m != "quadrature") throw config_error("grid.method: must be 'monte_carlo' or 'quadrature'");
  const auto method = m == "monte_carlo" ? ResolventMethod::monte_carlo : ResolventMethod::quadrature;
  MonteCarloOptions mc;
  mc.n_samples = c.mc.n_paths;
  mc.seed = *c.mc.seed;
  mc.workers = workers;
  ResolventQuery q{alpha, std::vector<double>(c.dim, 0.0), hp, *b.kernel, symmetrized_exponent(b.exp), b.mu};
  auto rep = verify_max_principle(q, xs, method, mc);
  Table t{"max_principle", {"config_hash", "seed", "n_samples", "method", "x_norm", "x0", "value", "std_error",
                            "below_origin_value"}, {}};
  t.rows.push_back({hash, (long long)mc.seed, (long long)mc.n_samples, m, 0.0, 0.0, rep.value_at_zero, rep.se_at_zero, 0LL});
  for (const auto& r : rep.rows)
    t.rows.push_back({hash, (long long)mc.seed, (long long)mc.n_samples, m, norm2(r.x), r.x[0], r.value, r.std_error,
                      (long long)r.below_zero_value});
  RunResult out;
  out.summary = {{"alpha", rep.alpha},
                 {"H", rep.H},
                 {"route_values", {{"resolvent_at_origin", rep.value_at_zero}, {"upsilon", rep.upsilon}}},
                 {"sup_location", rep.sup_location},
                 {"tolerances", {{"rel_equality", rep.rel_tolerance}, {"error_bar_multiplier", 3.0}}},
                 {"rel_diff", rep.rel_diff},
                 {"equality_ok", rep.equality_ok},
                 {"max_ok", rep.max_ok}};
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_ilt_study(const ExperimentConfig& c, const std::string& hash, int workers) {
  const auto b = detail::build_all(c);
  if (!b.kernel) throw config_error("noise.kernel: no pointwise kernel for this measure");
  const HurstParams hp(c.H, 0);
  auto sp = b.exp.stable_parameters();
  auto ts = detail::grid_numbers(c, "t", {1.0, 2.0, 4.0, 8.0});
  const std::string rule = c.grid.value("rule", "smoothed_midpoint");
  if (rule != "smoothed_midpoint" && rule != "sampled_midpoint")
    throw config_error("grid.rule: must be 'smoothed_midpoint' or 'sampled_midpoint'");
  const auto sym = symmetrized_exponent(b.exp);
  Table t{"ilt", {"config_hash", "seed", "n_paths", "n_steps", "rule", "t", "estimate", "std_error", "ilt_mean",
                  "z_score"}, {}};
  std::vector<double> est, mean;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    IltRun run;
    run.beta = sp->first;
    run.c = sp->second;
    run.dim = c.dim;
    run.t = ts[i];
    run.n_steps = c.mc.n_steps;
    run.n_bundles = c.mc.n_paths;
    // Each horizon gets its own block of streams.
    run.seed = splitmix64(*c.mc.seed + i);
    run.workers = workers;
    run.rule = rule == "smoothed_midpoint" ? IltRule::smoothed_midpoint : IltRule::sampled_midpoint;
    auto e = ilt_monte_carlo(run, *b.kernel, hp);
    auto m = ilt_mean(ts[i], hp, *b.kernel, sym, b.mu, c.plan);
    est.push_back(e.value);
    mean.push_back(m.value);
    t.rows.push_back({hash, (long long)*c.mc.seed, (long long)run.n_bundles, (long long)run.n_steps, rule, ts[i], e.value,
                      e.std_error, m.value, m.finite ? (e.value - m.value) / e.std_error : std::nan("")});
  }
  RunResult out;
  out.summary = {{"rows", t.rows.size()}};
  if (ts.size() >= 2 && std::all_of(mean.begin(), mean.end(), [](double v) { return std::isfinite(v); })) {
    out.summary["slope_estimate"] = detail::loglog_slope(ts, est);
    out.summary["slope_mean"] = detail::loglog_slope(ts, mean);
  }
  if (!std::holds_alternative<WhiteKernel>(b.kernel->form()) && !std::holds_alternative<ConstantKernel>(b.kernel->form()))
    out.summary["slope_expected"] = 2.0 * c.H - b.kernel->weight().degree / sp->first;
  detail::check_finite(t, "ilt_study", true);
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_field_variance(const ExperimentConfig& c, const std::string& hash, int workers) {
  const auto b = detail::build_all(c);
  const HurstParams hp(c.H, 0);
  auto ts = detail::grid_numbers(c, "t", {1.0});
  const double sigma = detail::grid_number(c, "test_sigma", 0.5);
  GaussianTestFunction phi(c.dim, sigma);
  Table t{"field_variance", {"config_hash", "seed", "n_samples", "problem", "t", "empirical_variance", "std_error",
                             "target_variance", "discrete_variance", "ratio", "min_gram_eigen_ratio"}, {}};
  std::uint64_t k = 0;
  for (Problem p : c.problems)
    for (double tt : ts) {
      auto r = sample_solution_spectral(tt, phi, b.exp, b.mu, hp, p, c.mc.n_paths, splitmix64(*c.mc.seed + k++), workers);
      t.rows.push_back({hash, (long long)*c.mc.seed, (long long)r.n_samples, to_string(p), tt, r.empirical_variance,
                        r.std_error, r.target_variance, r.discrete_variance, r.empirical_variance / r.target_variance,
                        r.min_gram_eigen_ratio});
    }
  RunResult out;
  out.summary = {{"rows", t.rows.size()}};
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_norm_xcheck(const ExperimentConfig& c, const std::string& hash, int workers) {
  const HurstParams hp(c.H, 0);
  const int n_exp = int(detail::grid_number(c, "n_exponential", 20));
  const int n_sin = int(detail::grid_number(c, "n_sin", 10));
  const std::uint64_t seed = c.mc.seed.value_or(1);
  const double a_max = detail::grid_number(c, "a_max", 5.0), b_max = detail::grid_number(c, "b_max", 5.0),
               t_max = detail::grid_number(c, "T_max", 5.0);
  struct Job {
    bool sin;
    double a, b, T;
  };
  std::vector<Job> jobs;
  auto rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> ua(0.0, a_max), ub(-b_max, b_max), ut(0.1, t_max);
  for (int i = 0; i < n_exp; ++i) {
    const double a = ua(rng), bb = ub(rng), T = ut(rng);
    jobs.push_back({false, a, bb, T});
  }
  for (int i = 0; i < n_sin; ++i) jobs.push_back({true, 0.0, 0.0, ut(rng)});
  Table t{"norm_xcheck", {"config_hash", "seed", "family", "a", "b", "T", "H", "time_domain", "spectral_domain",
                          "rel_diff"}, {}};
  t.rows.resize(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& j = jobs[i];
    auto x = j.sin ? h_norm_sin_time(j.T, hp) : h_norm_exponential_time(j.a, j.b, j.T, hp);
    auto y = j.sin ? h_norm_sin_spectral(j.T, hp) : h_norm_exponential_spectral(j.a, j.b, j.T, hp);
    t.rows[i] = {hash, (long long)seed, std::string(j.sin ? "sin" : "exponential"), j.a, j.b, j.T, c.H, x.value, y.value,
                 std::abs(x.value - y.value) / std::abs(x.value)};
  });
  RunResult out;
  double worst = 0.0;
  for (const auto& r : t.rows) worst = std::max(worst, std::get<double>(r[9]));
  out.summary = {{"rows", t.rows.size()}, {"max_rel_diff", worst}};
  out.tables.push_back(std::move(t));
  return out;
}

inline RunResult run_experiment(const ExperimentConfig& c, int workers) {
  const std::string h = config_hash(c.raw);
  RunResult r;
  if (c.experiment == "existence_scan") r = run_existence_scan(c, h, workers);
  else if (c.experiment == "nt_scan") r = run_nt_scan(c, h, workers);
  else if (c.experiment == "bounds_verify") r = run_bounds_verify(c, h, workers);
  else if (c.experiment == "max_principle") r = run_max_principle(c, h, workers);
  else if (c.experiment == "ilt_study") r = run_ilt_study(c, h, workers);
  else if (c.experiment == "field_variance") r = run_field_variance(c, h, workers);
  else if (c.experiment == "norm_xcheck") r = run_norm_xcheck(c, h, workers);
  else throw config_error("experiment: unknown '" + c.experiment + "'");
  for (const auto& t : r.tables) detail::check_finite(t, c.experiment, true);
  return r;
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes one CSV (and optionally JSON) per table plus manifest.json; returns
// the manifest.
inline json write_artifacts(const ExperimentConfig& c, const RunResult& r, const std::filesystem::path& dir,
                            const std::string& started, int workers) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (const auto& t : r.tables) {
    json entry{{"table", t.name}, {"rows", t.rows.size()}, {"columns", t.columns}};
    if (c.output.csv) {
      std::ofstream(dir / (t.name + ".csv")) << to_csv(t);
      entry["csv"] = t.name + ".csv";
    }
    if (c.output.json) {
      std::ofstream(dir / (t.name + ".json")) << to_json(t).dump(2) << "\n";
      entry["json"] = t.name + ".json";
    }
    files.push_back(entry);
  }
  json m{{"toolkit_version", version},
         {"config_format_version", config_format_version},
         {"experiment", c.experiment},
         {"config_hash", config_hash(c.raw)},
         {"seed", c.mc.seed ? json(*c.mc.seed) : json()},
         {"workers", workers},
         {"started_at", started},
         {"finished_at", utc_now()},
         {"tables", files},
         {"summary", r.summary},
         {"config", c.raw}};
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  return m;
}

}  // namespace fracspde
