#pragma once

// Experiment configuration: a JSON document, schema version 1 (see README).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracspde/errors.hpp"
#include "fracspde/existence.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/spectral.hpp"
#include "fracspde/temporal.hpp"
#include "fracspde/version.hpp"

namespace fracspde {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"existence_scan", "nt_scan",       "bounds_verify", "max_principle",
                                              "ilt_study",      "field_variance", "norm_xcheck"};
  return names;
}

struct McSettings {
  std::size_t n_paths = 10000;
  int n_steps = 64;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct OutputSettings {
  std::string dir;
  bool csv = true;
  bool json = true;
};

struct ExperimentConfig {
  std::string experiment;
  int dim = 1;
  json process;
  double H = 0.75;
  json measure;
  json kernel;  // null: the Fourier partner of the measure
  std::vector<Problem> problems{Problem::parabolic};
  json grid = json::object();
  TruncationPlan plan;
  int time_nodes = 24;
  McSettings mc;
  OutputSettings output;
  json raw;
};

// Field-level problems found while reading a config.
class Diagnostics {
 public:
  void error(const std::string& field, const std::string& msg) { items_.push_back(field + ": " + msg); }
  bool ok() const { return items_.empty(); }
  const std::vector<std::string>& items() const { return items_; }
  std::string joined() const {
    std::string s;
    for (const auto& i : items_) s += (s.empty() ? "" : "\n") + i;
    return s;
  }

 private:
  std::vector<std::string> items_;
};

namespace detail {

inline double get_number(const json& obj, const std::string& key, const std::string& path, Diagnostics& dg,
                         std::optional<double> fallback = std::nullopt) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) return *fallback;
    dg.error(path + "." + key, "missing");
    return 0.0;
  }
  if (!obj[key].is_number()) {
    dg.error(path + "." + key, "must be a number");
    return fallback.value_or(0.0);
  }
  return obj[key].get<double>();
}

inline std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path, Diagnostics& dg,
                                       std::vector<double> fallback = {}, bool required = false) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (required) dg.error(path + "." + key, "missing");
    return fallback;
  }
  const auto& v = obj[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) {
    dg.error(path + "." + key, "must be a number or a non-empty array of numbers");
    return fallback;
  }
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) {
      dg.error(path + "." + key, "array entries must be numbers");
      return fallback;
    }
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::string get_string(const json& obj, const std::string& key, const std::string& path, Diagnostics& dg,
                              std::optional<std::string> fallback = std::nullopt) {
  if (!obj.is_object() || !obj.contains(key)) {
    if (fallback) return *fallback;
    dg.error(path + "." + key, "missing");
    return {};
  }
  if (!obj[key].is_string()) {
    dg.error(path + "." + key, "must be a string");
    return fallback.value_or("");
  }
  return obj[key].get<std::string>();
}

// Runs a constructor and turns its config_error into a diagnostic.
template <class F>
auto try_build(const std::string& field, Diagnostics& dg, F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const config_error& e) {
    dg.error(field, e.what());
  }
  return std::nullopt;
}

}  // namespace detail

inline CharacteristicExponent build_exponent(const json& spec, int dim, Diagnostics& dg, const std::string& path = "process") {
  const std::string type = detail::get_string(spec, "type", path, dg, "stable");
  if (type == "stable") {
    const double beta = detail::get_number(spec, "beta", path, dg);
    const double c = detail::get_number(spec, "c", path, dg, 1.0);
    if (auto e = detail::try_build(path, dg, [&] { return CharacteristicExponent::stable(dim, beta, c); })) return *e;
  } else if (type == "brownian") {
    const double s = detail::get_number(spec, "scale", path, dg, 1.0);
    if (auto e = detail::try_build(path, dg, [&] { return CharacteristicExponent::brownian(dim, s); })) return *e;
  } else if (type == "asymmetric") {
    Asymmetric a{detail::get_number(spec, "beta", path, dg), detail::get_number(spec, "c", path, dg, 1.0),
                 detail::get_number(spec, "skew", path, dg), detail::get_number(spec, "skew_power", path, dg, 1.0)};
    if (auto e = detail::try_build(path, dg, [&] { return CharacteristicExponent(dim, a); })) return *e;
  } else {
    dg.error(path + ".type", "unknown exponent type '" + type + "' (stable, brownian, asymmetric)");
  }
  return CharacteristicExponent::stable(std::max(dim, 1), 2.0);
}

// Atoms from a CSV file with header xi_1,...,xi_d,w and one atom per row.
inline std::vector<Atom> load_atoms_csv(const std::string& file, int dim) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open '" + file + "'");
  std::string line;
  if (!std::getline(in, line)) throw config_error("'" + file + "' is empty");
  std::vector<Atom> atoms;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw config_error("'" + file + "' line " + std::to_string(lineno) + ": not a number");
      }
    }
    if (int(v.size()) != dim + 1)
      throw config_error("'" + file + "' line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) + " columns");
    atoms.push_back(Atom{std::vector<double>(v.begin(), v.end() - 1), v.back()});
  }
  if (atoms.empty()) throw config_error("'" + file + "' has no atoms");
  return atoms;
}

inline SpectralMeasure build_measure(const json& spec, int dim, Diagnostics& dg, const std::string& path = "noise.measure") {
  const std::string type = detail::get_string(spec, "type", path, dg, "riesz");
  std::optional<SpectralMeasure> m;
  if (type == "riesz") {
    const double a = detail::get_number(spec, "alpha", path, dg);
    m = detail::try_build(path, dg, [&] { return SpectralMeasure::riesz(dim, a); });
  } else if (type == "product_fbm") {
    auto h = detail::get_numbers(spec, "hurst", path, dg, {}, true);
    if (!h.empty() && int(h.size()) != dim) dg.error(path + ".hurst", "needs one entry per dimension");
    else if (!h.empty()) m = detail::try_build(path, dg, [&] { return SpectralMeasure::product_fbm(h); });
  } else if (type == "lebesgue") {
    const double c = detail::get_number(spec, "density", path, dg, 1.0);
    m = detail::try_build(path, dg, [&] { return SpectralMeasure::lebesgue(dim, c); });
  } else if (type == "discrete" && spec.contains("csv")) {
    const std::string file = detail::get_string(spec, "csv", path, dg);
    std::vector<Atom> atoms;
    try {
      atoms = load_atoms_csv(file, dim);
    } catch (const config_error& e) {
      dg.error(path + ".csv", e.what());
    }
    if (!atoms.empty()) m = detail::try_build(path, dg, [&] { return SpectralMeasure::discrete(dim, atoms); });
  } else if (type == "discrete") {
    std::vector<Atom> atoms;
    if (!spec.contains("atoms") || !spec["atoms"].is_array() || spec["atoms"].empty()) {
      dg.error(path + ".atoms", "must be a non-empty array");
    } else {
      for (std::size_t i = 0; i < spec["atoms"].size(); ++i) {
        const auto& a = spec["atoms"][i];
        const std::string p = path + ".atoms[" + std::to_string(i) + "]";
        auto xi = detail::get_numbers(a, "xi", p, dg, {}, true);
        if (!xi.empty() && int(xi.size()) != dim) dg.error(p + ".xi", "needs one entry per dimension");
        atoms.push_back(Atom{xi, detail::get_number(a, "weight", p, dg)});
      }
      if (dg.ok()) m = detail::try_build(path, dg, [&] { return SpectralMeasure::discrete(dim, atoms); });
    }
  } else {
    dg.error(path + ".type", "unknown measure type '" + type + "' (riesz, product_fbm, lebesgue, discrete)");
  }
  return m ? *m : SpectralMeasure::lebesgue(std::max(dim, 1), 1.0);
}

inline std::optional<Kernel> build_kernel(const json& spec, int dim, Diagnostics& dg, const std::string& path = "noise.kernel") {
  if (spec.is_null()) return std::nullopt;
  const std::string type = detail::get_string(spec, "type", path, dg);
  if (type == "riesz") {
    const double a = detail::get_number(spec, "alpha", path, dg);
    std::optional<double> c;
    if (spec.contains("c")) c = detail::get_number(spec, "c", path, dg);
    return detail::try_build(path, dg, [&] { return Kernel::riesz(dim, a, c); });
  }
  if (type == "product_fbm") {
    auto h = detail::get_numbers(spec, "hurst", path, dg, {}, true);
    if (h.empty()) return std::nullopt;
    return detail::try_build(path, dg, [&] { return Kernel::product_fbm(h); });
  }
  if (type == "constant") {
    const double c = detail::get_number(spec, "c", path, dg, 1.0);
    return detail::try_build(path, dg, [&] { return Kernel::constant(dim, c); });
  }
  if (type == "white") {
    const double c = detail::get_number(spec, "c", path, dg, 1.0);
    return detail::try_build(path, dg, [&] { return Kernel::white(dim, c); });
  }
  dg.error(path + ".type", "unknown kernel type '" + type + "' (riesz, product_fbm, constant, white)");
  return std::nullopt;
}

// Kernel paired with a measure: the configured one, else the partner of the measure.
inline std::optional<Kernel> partner_kernel(const SpectralMeasure& mu) {
  const auto& f = mu.form();
  if (const auto* r = std::get_if<RieszDensity>(&f)) return Kernel::riesz(mu.dim(), r->alpha);
  if (const auto* p = std::get_if<ProductFbmDensity>(&f)) return Kernel::product_fbm(p->hurst);
  if (const auto* l = std::get_if<LebesgueDensity>(&f))
    return Kernel::white(mu.dim(), l->density * std::pow(2.0 * std::numbers::pi, mu.dim()));
  if (const auto* d = std::get_if<DiscreteMeasure>(&f); d && d->atoms.size() == 1 &&
      std::all_of(d->atoms[0].xi.begin(), d->atoms[0].xi.end(), [](double v) { return v == 0.0; }))
    return Kernel::constant(mu.dim(), d->atoms[0].weight);
  return std::nullopt;
}

inline bool uses_monte_carlo(const std::string& experiment) {
  return experiment == "max_principle" || experiment == "ilt_study" || experiment == "field_variance";
}

// Reads and checks a config; all problems are collected in dg.
inline ExperimentConfig parse_config(const json& j, Diagnostics& dg, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  c.raw = j;
  if (!j.is_object()) {
    dg.error("(root)", "config must be a JSON object");
    return c;
  }
  static const std::vector<std::string> known{"format_version", "experiment", "dim", "process", "noise", "problem",
                                              "problems", "grid", "quadrature", "mc", "output", "description"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) dg.error(k, "unknown key");
  const double fv = detail::get_number(j, "format_version", "(root)", dg, double(config_format_version));
  if (fv != config_format_version) dg.error("format_version", "unsupported version " + std::to_string(int(fv)));
  c.experiment = detail::get_string(j, "experiment", "(root)", dg);
  if (!c.experiment.empty() && std::find(experiment_names().begin(), experiment_names().end(), c.experiment) ==
                                   experiment_names().end())
    dg.error("experiment", "unknown experiment '" + c.experiment + "'");
  const double dim = detail::get_number(j, "dim", "(root)", dg, 1.0);
  if (dim < 1 || dim != std::floor(dim) || dim > 8) dg.error("dim", "must be an integer in [1, 8]");
  c.dim = std::clamp(int(dim), 1, 8);

  c.process = j.value("process", json{{"type", "stable"}, {"beta", 2.0}});
  if (!c.process.is_object()) dg.error("process", "must be an object");
  const json noise = j.value("noise", json::object());
  if (!noise.is_object()) dg.error("noise", "must be an object");
  c.H = detail::get_number(noise, "H", "noise", dg);
  if (!(c.H > 0.5 && c.H < 1.0)) dg.error("noise.H", "Hurst index must lie in (1/2, 1), got " + std::to_string(c.H));
  c.measure = noise.value("measure", json());
  // Data files are looked up next to the config.
  if (c.measure.is_object() && c.measure.contains("csv") && c.measure["csv"].is_string() && !base_dir.empty()) {
    std::filesystem::path f = c.measure["csv"].get<std::string>();
    if (f.is_relative()) c.measure["csv"] = (base_dir / f).string();
  }
  if (!c.measure.is_object()) dg.error("noise.measure", "missing or not an object");
  c.kernel = noise.value("kernel", json());

  std::vector<std::string> problems;
  if (j.contains("problems") && j["problems"].is_array()) {
    for (const auto& p : j["problems"]) problems.push_back(p.is_string() ? p.get<std::string>() : "?");
  } else {
    problems.push_back(detail::get_string(j, "problem", "(root)", dg, "parabolic"));
  }
  c.problems.clear();
  for (const auto& p : problems) {
    if (p == "parabolic") c.problems.push_back(Problem::parabolic);
    else if (p == "hyperbolic") c.problems.push_back(Problem::hyperbolic);
    else dg.error("problem", "must be 'parabolic' or 'hyperbolic', got '" + p + "'");
  }

  c.grid = j.value("grid", json::object());
  if (!c.grid.is_object()) dg.error("grid", "must be an object");
  const json q = j.value("quadrature", json::object());
  c.plan.radial_nodes = int(detail::get_number(q, "radial_nodes", "quadrature", dg, 24));
  c.plan.angular_nodes = int(detail::get_number(q, "angular_nodes", "quadrature", dg, 8));
  c.plan.outer_shells = int(detail::get_number(q, "outer_shells", "quadrature", dg, 48));
  c.plan.inner_shells = int(detail::get_number(q, "inner_shells", "quadrature", dg, 30));
  c.plan.growth_delta = detail::get_number(q, "growth_delta", "quadrature", dg, 0.05);
  c.time_nodes = int(detail::get_number(q, "time_nodes", "quadrature", dg, 24));
  if (c.plan.radial_nodes < 4 || c.plan.angular_nodes < 2 || c.plan.outer_shells < 4 || c.plan.inner_shells < 1 ||
      c.time_nodes < 12)
    dg.error("quadrature", "mesh parameters too small (radial_nodes >= 4, angular_nodes >= 2, outer_shells >= 4, "
                           "inner_shells >= 1, time_nodes >= 12)");

  const json mc = j.value("mc", json::object());
  c.mc.n_paths = std::size_t(detail::get_number(mc, "n_paths", "mc", dg, 10000));
  c.mc.n_steps = int(detail::get_number(mc, "n_steps", "mc", dg, 64));
  c.mc.workers = int(detail::get_number(mc, "workers", "mc", dg, 1));
  if (mc.is_object() && mc.contains("seed")) {
    if (!mc["seed"].is_number_integer() || mc["seed"].get<long long>() < 0) dg.error("mc.seed", "must be a non-negative integer");
    else c.mc.seed = mc["seed"].get<std::uint64_t>();
  }
  if (uses_monte_carlo(c.experiment)) {
    if (!c.mc.seed) dg.error("mc.seed", "required for experiment '" + c.experiment + "'");
    if (c.mc.n_paths < 2) dg.error("mc.n_paths", "must be >= 2");
    if (c.mc.n_steps < 2) dg.error("mc.n_steps", "must be >= 2");
  }
  if (c.mc.workers < 1) dg.error("mc.workers", "must be >= 1");

  const json out = j.value("output", json::object());
  c.output.dir = detail::get_string(out, "dir", "output", dg, "");
  if (out.is_object() && out.contains("formats")) {
    c.output.csv = c.output.json = false;
    if (!out["formats"].is_array()) dg.error("output.formats", "must be an array");
    else
      for (const auto& f : out["formats"]) {
        if (f == "csv") c.output.csv = true;
        else if (f == "json") c.output.json = true;
        else dg.error("output.formats", "entries must be 'csv' or 'json'");
      }
  }

  // Semantic checks that need the constructed objects.
  if (c.process.is_object() && c.measure.is_object()) {
    auto e = build_exponent(c.process, c.dim, dg);
    auto mu = build_measure(c.measure, c.dim, dg);
    auto k = build_kernel(c.kernel, c.dim, dg);
    const bool hyperbolic = std::find(c.problems.begin(), c.problems.end(), Problem::hyperbolic) != c.problems.end();
    if (hyperbolic && !e.is_real())
      dg.error("process", "hyperbolic problem requires a symmetric exponent (Im psi = 0 everywhere)");
    if (k && dg.ok() && !k->is_partner(mu)) dg.error("noise.kernel", "is not the Fourier partner of noise.measure");
    if (c.experiment == "field_variance" && !std::holds_alternative<DiscreteMeasure>(mu.form()))
      dg.error("noise.measure", "field_variance needs a discrete measure");
    if ((c.experiment == "max_principle" || c.experiment == "ilt_study") && dg.ok()) {
      auto sp = e.stable_parameters();
      if (!sp || sp->first > 2.0) dg.error("process", "Monte Carlo experiments need a symmetric stable exponent with beta <= 2");
      if (!k && !partner_kernel(mu)) dg.error("noise.kernel", "no pointwise kernel for this measure");
    }
  }
  return c;
}

inline json read_json_file(const std::string& path, Diagnostics& dg) {
  std::ifstream in(path);
  if (!in) {
    dg.error("(file)", "cannot open '" + path + "'");
    return json();
  }
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    dg.error("(file)", std::string("parse error: ") + e.what());
  }
  return json();
}

// Canonical form for hashing: sorted keys, with settings that cannot change
// numeric output (worker count, output location) removed.
inline std::string canonical_config(const json& raw) {
  json c = raw;
  if (c.is_object()) {
    if (c.contains("mc") && c["mc"].is_object()) c["mc"].erase("workers");
    c.erase("output");
    c.erase("description");
  }
  return c.dump();
}

inline std::string config_hash(const json& raw) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(raw)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace fracspde
