#include "fracwave/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fracwave/error.hpp"
#include "fracwave/estimators.hpp"
#include "json.hpp"

namespace fracwave {

using nlohmann::json;

namespace {

const char* const kKinds[] = {"check", "exponents", "isometry", "scaling", "frontier", "simulate", "validate-noise"};

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw DomainError("config", "'" + name_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key, double def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) throw DomainError("config", where(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw DomainError("config", where(key) + " must be finite");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw DomainError("config", where(key) + " must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw DomainError("config", where(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) throw DomainError("config", where(key) + " must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw DomainError("config", where(key) + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    seen_.push_back(key);
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) throw DomainError("config", where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw DomainError("config", where(key) + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const json& raw(const std::string& key) {
    seen_.push_back(key);
    return j_.at(key);
  }

  void raw_optional(const std::string& key) { seen_.push_back(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw DomainError("config", "unknown key '" + where(it.key()) + "'");
    }
  }

  std::string where(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
  std::vector<std::string> seen_;
};

const json& section_or_empty(const json& root, const char* key) {
  static const json empty = json::object();
  return root.contains(key) ? root.at(key) : empty;
}

struct Config {
  ModelParams model;
  SpectralMeasure measure;
  QuadratureSettings quadrature;
  double L = 8.0;
  int N = 512;
  double dt = 0.0;
  CoefficientFn sigma, b;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double v0_bump = 0.0;
  std::optional<double> z_amplitude;
  unsigned noise_substeps = 1;
  std::string kind;
  json knobs;
  json echo;
};

json coefficient_echo(const CoefficientFn& f) {
  return {{"type", to_string(f.kind)}, {"lambda", f.lambda}, {"offset", f.offset}};
}

CoefficientFn parse_coefficient(const json& j, const std::string& name) {
  Section s(j, name);
  const std::string type = s.string("type", "zero");
  const double lambda = s.number("lambda", 0.0);
  const double offset = s.number("offset", 0.0);
  s.finish();
  if (type != "affine" && offset != 0.0) throw DomainError("config", name + ".offset is only used by type 'affine'");
  return make_coefficient(type, lambda, offset);
}

// Knob defaults per experiment kind. A null default accepts a number.
json knob_defaults(const std::string& kind) {
  if (kind == "check") return {{"eta", nullptr}, {"method", "auto"}};
  if (kind == "exponents") return {{"eta", 0.5}, {"delta", 1.0}, {"gamma_ic", 0.0}, {"q", 2.0}};
  if (kind == "isometry") return {{"reversed", true}, {"mc_paths", 0}, {"tolerance", 0.05}};
  if (kind == "scaling")
    return {{"t1", 0.5},
            {"lag_exponents", {3, 4, 5, 6, 7, 8, 9, 10}},
            {"q", 2.0},
            {"method", "quadrature"},
            {"n_paths", 200},
            {"tolerance", 0.05}};
  if (kind == "frontier")
    return {{"t", nullptr},
            {"alphas", {0.2, 0.4, 0.6, 0.9, 0.95}},
            {"n_paths", 100},
            {"grid_sizes", {256, 512, 1024}}};
  if (kind == "simulate") return {{"path", 0}, {"snapshot_times", json::array()}, {"write_fields", false}};
  if (kind == "validate-noise") return {{"n_samples", 10000}, {"confidence", 0.99}};
  throw DomainError("config", "unknown experiment.kind '" + kind + "'");
}

bool same_type(const json& def, const json& v) {
  if (def.is_null()) return v.is_number() || v.is_null();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  return def.type() == v.type();
}

json merge_knobs(const std::string& kind, const json& user) {
  json out = knob_defaults(kind);
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.key() == "kind") continue;
    if (!out.contains(it.key()))
      throw DomainError("config", "unknown key 'experiment." + it.key() + "' for kind '" + kind + "'");
    if (!same_type(out[it.key()], it.value()))
      throw DomainError("config", "experiment." + it.key() + " has the wrong type");
    out[it.key()] = it.value();
  }
  return out;
}

SpectralMeasure parse_measure(const json& j, int d, json& echo) {
  Section s(j, "measure");
  const std::string type = s.string("type", "riesz");
  if (type == "riesz") {
    const double beta = s.number("beta", 0.5);
    std::optional<double> constant;
    if (s.has("constant")) constant = s.number("constant", 1.0);
    else s.raw_optional("constant");
    s.finish();
    SpectralMeasure mu = riesz_measure(beta, d, constant);
    echo = {{"type", type}, {"beta", beta}, {"constant", std::get<RieszKernel>(mu).constant}};
    return mu;
  }
  if (type == "flat") {
    const double level = s.number("level", 1.0);
    s.finish();
    echo = {{"type", type}, {"level", level}};
    return FlatDensity{level, d};
  }
  if (type == "atoms") {
    FiniteAtoms atoms{d, {}};
    json list = json::array();
    if (s.has("atoms")) {
      const json& a = s.raw("atoms");
      if (!a.is_array()) throw DomainError("config", "measure.atoms must be an array");
      for (const auto& item : a) {
        Section as(item, "measure.atoms[]");
        Atom atom{as.numbers("location", {}), as.number("mass", 0.0)};
        as.finish();
        list.push_back({{"location", atom.location}, {"mass", atom.mass}});
        atoms.atoms.push_back(std::move(atom));
      }
    } else {
      s.raw_optional("atoms");
    }
    s.finish();
    echo = {{"type", type}, {"atoms", list}};
    return atoms;
  }
  throw DomainError("config", "unknown measure.type '" + type + "' (riesz, flat, atoms)");
}

Config parse(const json& root) {
  if (!root.is_object()) throw DomainError("config", "the config must be a JSON object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    static const char* const allowed[] = {"model", "measure", "grid", "solver", "quadrature", "experiment"};
    if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return it.key() == a; }) ==
        std::end(allowed))
      throw DomainError("config", "unknown key '" + it.key() + "'");
  }
  Config c;
  {
    Section s(section_or_empty(root, "model"), "model");
    c.model.k = s.number("k", 1.0);
    c.model.d = static_cast<int>(s.integer("d", 1));
    c.model.T = s.number("T", 1.0);
    s.finish();
    c.model.validate();
  }
  json measure_echo;
  c.measure = parse_measure(section_or_empty(root, "measure"), c.model.d, measure_echo);
  validate_measure(c.measure);
  {
    Section s(section_or_empty(root, "quadrature"), "quadrature");
    c.quadrature.rel_tol = s.number("rel_tol", c.quadrature.rel_tol);
    c.quadrature.abs_tol = s.number("abs_tol", c.quadrature.abs_tol);
    c.quadrature.truncation_radius = s.number("truncation_radius", c.quadrature.truncation_radius);
    c.quadrature.max_subdivisions = s.integer("max_subdivisions", c.quadrature.max_subdivisions);
    s.finish();
    c.quadrature.validate();
  }
  {
    Section s(section_or_empty(root, "grid"), "grid");
    c.L = s.number("L", 8.0);
    c.N = static_cast<int>(s.integer("N", 512));
    s.finish();
    make_grid(c.model.d, c.L, c.N);
  }
  json z_echo = nullptr;
  {
    Section s(section_or_empty(root, "solver"), "solver");
    c.dt = s.number("dt", c.model.T / 1024);
    c.sigma = s.has("sigma") ? parse_coefficient(s.raw("sigma"), "solver.sigma") : (s.raw_optional("sigma"), CoefficientFn{});
    c.b = s.has("b") ? parse_coefficient(s.raw("b"), "solver.b") : (s.raw_optional("b"), CoefficientFn{});
    c.seed = s.unsigned_integer("seed", 0);
    c.alpha = s.number("alpha", 0.0);
    c.v0_bump = s.number("v0_bump", 0.0);
    if (s.has("forced_z")) {
      Section z(s.raw("forced_z"), "solver.forced_z");
      c.z_amplitude = z.number("amplitude", 1.0);
      z.finish();
      z_echo = {{"amplitude", *c.z_amplitude}};
    } else {
      s.raw_optional("forced_z");
    }
    const std::uint64_t sub = s.unsigned_integer("noise_substeps", 1);
    if (sub == 0 || sub > 1024) throw DomainError("config", "solver.noise_substeps must lie in [1, 1024]");
    c.noise_substeps = static_cast<unsigned>(sub);
    s.finish();
    if (!(c.dt > 0) || c.dt > c.model.T) throw DomainError("config", "solver.dt must satisfy 0 < dt <= T");
  }
  {
    if (!root.contains("experiment")) throw DomainError("config", "missing section 'experiment'");
    const json& e = root.at("experiment");
    if (!e.is_object()) throw DomainError("config", "'experiment' must be an object");
    if (!e.contains("kind") || !e.at("kind").is_string()) throw DomainError("config", "experiment.kind is required");
    c.kind = e.at("kind").get<std::string>();
    if (std::find(std::begin(kKinds), std::end(kKinds), c.kind) == std::end(kKinds))
      throw DomainError("config", "unknown experiment.kind '" + c.kind + "'");
    c.knobs = merge_knobs(c.kind, e);
  }
  json experiment = c.knobs;
  experiment["kind"] = c.kind;
  c.echo = {
      {"model", {{"k", c.model.k}, {"d", c.model.d}, {"T", c.model.T}}},
      {"measure", measure_echo},
      {"grid", {{"L", c.L}, {"N", c.N}}},
      {"solver",
       {{"dt", c.dt},
        {"sigma", coefficient_echo(c.sigma)},
        {"b", coefficient_echo(c.b)},
        {"seed", c.seed},
        {"alpha", c.alpha},
        {"v0_bump", c.v0_bump},
        {"forced_z", z_echo},
        {"noise_substeps", c.noise_substeps}}},
      {"quadrature",
       {{"rel_tol", c.quadrature.rel_tol},
        {"abs_tol", c.quadrature.abs_tol},
        {"truncation_radius", c.quadrature.truncation_radius},
        {"max_subdivisions", c.quadrature.max_subdivisions}}},
      {"experiment", experiment},
  };
  return c;
}

void apply_override(json& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw DomainError("config", "override '" + item + "' is not key=value");
  const std::string key = item.substr(0, eq), text = item.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw DomainError("config", "override key '" + key + "' has an empty component");
    if (!node->is_object()) throw DomainError("config", "override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || node->at(part).is_null()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end)
    throw DomainError("config", "FRACWAVE_SEED must be a non-negative 64-bit integer, got '" + text + "'");
  return v;
}

json load(const std::string& text, const std::vector<std::string>& overrides, const std::optional<std::string>& env_seed) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw DomainError("config", "the config must be a JSON object");
  if (env_seed) {
    if (!root.contains("solver") || root["solver"].is_null()) root["solver"] = json::object();
    if (!root["solver"].is_object()) throw DomainError("config", "'solver' must be an object");
    root["solver"]["seed"] = parse_seed(*env_seed);
  }
  for (const auto& o : overrides) apply_override(root, o);
  return root;
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream s;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) s << (i ? "," : "") << cells[i];
      s << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    text(name, s.str());
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::Io, "cli", "cannot write " + (dir_ / name).string());
    files_.push_back(name);
  }

  void field(const std::string& name, const RealField& f) {
    write_field_file((dir_ / name).string(), f);
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

SolverConfig solver_config(const Config& c) {
  SolverConfig s;
  s.params = c.model;
  s.measure = c.measure;
  s.grid = make_grid(c.model.d, c.L, c.N);
  s.dt = c.dt;
  s.sigma = c.sigma;
  s.b = c.b;
  s.alpha = c.alpha;
  s.seed = c.seed;
  s.v0_bump_amplitude = c.v0_bump;
  s.noise_substeps = c.noise_substeps;
  if (c.z_amplitude) {
    DeterministicZ z;
    z.shape = GaussianBump{c.model.d, *c.z_amplitude};
    s.forced_Z = z;
  }
  return s;
}

DeterministicZ require_z(const Config& c) {
  if (!c.z_amplitude) throw DomainError("config", "experiment '" + c.kind + "' needs solver.forced_z");
  DeterministicZ z;
  z.shape = GaussianBump{c.model.d, *c.z_amplitude};
  return z;
}

std::vector<int> int_list(const json& j, const char* name) {
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw DomainError("config", std::string("experiment.") + name + " must hold integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::vector<double> number_list(const json& j, const char* name) {
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw DomainError("config", std::string("experiment.") + name + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Each runner writes its files and returns whether its --check condition holds.
bool run_check(const Config& c, Outputs& out) {
  const std::string method = c.knobs["method"].get<std::string>();
  if (method != "auto" && method != "quadrature")
    throw DomainError("config", "experiment.method must be 'auto' or 'quadrature'");
  const MethodChoice choice = method == "auto" ? MethodChoice::Auto : MethodChoice::ForceQuadrature;
  std::vector<ConditionReport> reports{check_dalang_condition(c.measure, c.model.k, c.alpha, c.quadrature, choice)};
  if (!c.knobs["eta"].is_null())
    reports.push_back(
        check_eta_condition(c.measure, c.model.k, c.alpha, c.knobs["eta"].get<double>(), c.quadrature, choice));
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (const auto& r : reports) {
    rows.push_back({to_string(r.condition_id), num(r.value), r.holds ? "true" : "false", to_string(r.status),
                    to_string(r.method), num(r.tolerance_used), num(r.tail_exponent)});
    ok = ok && r.holds;
  }
  out.csv("check.csv", {"condition", "value", "holds", "status", "method", "tolerance_used", "tail_exponent"}, rows);
  return ok;
}

bool run_exponents(const Config& c, Outputs& out) {
  SmoothnessQuery q;
  q.alpha = c.alpha;
  q.eta = c.knobs["eta"].get<double>();
  q.delta = c.knobs["delta"].get<double>();
  q.gamma_ic = c.knobs["gamma_ic"].get<double>();
  q.q = c.knobs["q"].get<double>();
  const ExponentReport r = holder_exponents(c.model, c.measure, q);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.csv("exponents.csv", {"quantity", "value"},
          {{"alpha_max", num(r.alpha_max)},
           {"theta0", num(r.theta0)},
           {"theta1", num(r.theta1.value_or(nan))},
           {"moment_slope", num(r.moment_slope.value_or(nan))},
           {"time_holder_sup", num(r.time_holder_sup)},
           {"spatial_holder_sup", num(r.spatial_holder_sup.value_or(nan))}});
  return true;
}

bool run_isometry(const Config& c, Outputs& out, const McOptions& mc) {
  const DeterministicZ z = require_z(c);
  const bool reversed = c.knobs["reversed"].get<bool>();
  const int paths = c.knobs["mc_paths"].get<int>();
  const double tol = c.knobs["tolerance"].get<double>();
  if (paths < 0 || paths == 1) throw DomainError("config", "experiment.mc_paths must be 0 or at least 2");
  const double value = isometry_functional(c.measure, c.model.k, c.alpha, z, c.model.T, reversed, c.quadrature);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double mean = nan, se = nan, rel = nan;
  if (paths > 0) {
    const MomentEstimate e = mc_moment(solver_config(c), c.model.T, c.alpha, 2.0, paths, mc);
    mean = e.mean, se = e.std_error, rel = std::abs(mean / value - 1.0);
  }
  out.csv("isometry.csv", {"alpha", "T", "reversed", "quadrature", "mc_mean", "mc_std_error", "rel_error"},
          {{num(c.alpha), num(c.model.T), reversed ? "true" : "false", num(value), num(mean), num(se), num(rel)}});
  return paths == 0 || rel <= tol;
}

bool run_scaling(const Config& c, Outputs& out, const McOptions& mc) {
  const double t1 = c.knobs["t1"].get<double>();
  const double q = c.knobs["q"].get<double>();
  const double tol = c.knobs["tolerance"].get<double>();
  const std::string method = c.knobs["method"].get<std::string>();
  std::vector<double> lags;
  for (int e : int_list(c.knobs["lag_exponents"], "lag_exponents")) lags.push_back(std::ldexp(1.0, -e));
  std::sort(lags.begin(), lags.end());
  ScalingFit fit;
  if (method == "quadrature") {
    if (q != 2.0) throw DomainError("config", "the quadrature route computes q = 2 only");
    if (lags.size() < 4) throw DomainError("config", "experiment.lag_exponents needs at least 4 entries");
    const DeterministicZ z = require_z(c);
    fit.lags = lags;
    std::vector<double> moments;
    for (double h : lags) {
      moments.push_back(increment_second_moment(c.measure, c.model.k, c.alpha, z, t1, t1 + h, c.quadrature));
      fit.moments.push_back({t1 + h, c.alpha, 2.0, moments.back(), 0.0, 0});
    }
    const PowerLawFit pl = fit_power_law(lags, moments);
    fit.slope = fit.slope_ci_lo = fit.slope_ci_hi = pl.slope;
    fit.intercept = pl.intercept;
    fit.theory_slope = theory_increment_slope(c.measure, c.model.k, c.alpha, 2.0);
    fit.tolerance = tol;
    fit.verdict = std::isnan(fit.theory_slope)                   ? Verdict::Inconclusive
                  : std::abs(fit.slope - fit.theory_slope) <= tol ? Verdict::Consistent
                                                                  : Verdict::Inconsistent;
  } else if (method == "mc") {
    fit = mc_increment_scaling(solver_config(c), t1, lags, c.alpha, q, c.knobs["n_paths"].get<int>(), mc, tol);
  } else {
    throw DomainError("config", "experiment.method must be 'quadrature' or 'mc'");
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < fit.lags.size(); ++i) {
    const auto& m = fit.moments[i];
    rows.push_back({num(fit.lags[i]), num(m.mean), num(m.std_error), num(std::log(fit.lags[i])), num(std::log(m.mean))});
  }
  out.csv("scaling.csv", {"lag", "moment", "std_error", "log_lag", "log_moment"}, rows);
  out.csv("scaling_fit.csv",
          {"method", "slope", "slope_ci_lo", "slope_ci_hi", "theory_slope", "dropped_largest_lag", "verdict"},
          {{method, num(fit.slope), num(fit.slope_ci_lo), num(fit.slope_ci_hi), num(fit.theory_slope),
            fit.dropped_largest_lag ? "true" : "false", to_string(fit.verdict)}});
  return fit.verdict == Verdict::Consistent;
}

bool run_frontier(const Config& c, Outputs& out, const McOptions& mc) {
  const double t = c.knobs["t"].is_null() ? c.model.T : c.knobs["t"].get<double>();
  const std::vector<double> alphas = number_list(c.knobs["alphas"], "alphas");
  const std::vector<int> sizes = int_list(c.knobs["grid_sizes"], "grid_sizes");
  const FrontierReport rep = regularity_frontier(solver_config(c), t, alphas, c.knobs["n_paths"].get<int>(), sizes, mc);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    for (std::size_t i = 0; i < r.grid_sizes.size(); ++i)
      rows.push_back({num(r.alpha), std::to_string(r.grid_sizes[i]), num(r.estimates[i].mean), to_string(r.verdict)});
  out.csv("frontier.csv", {"alpha", "N", "estimate", "verdict"}, rows);
  double predicted = std::numeric_limits<double>::quiet_NaN();
  if (const auto* r = std::get_if<RieszKernel>(&c.measure)) predicted = c.model.k - r->beta / 2;
  out.csv("frontier_summary.csv", {"crossover", "inconclusive_width", "predicted"},
          {{num(rep.crossover), num(rep.inconclusive_width), num(predicted)}});
  bool ok = true;
  for (const auto& r : rep.rows) {
    if (std::isnan(predicted)) break;
    if (r.alpha < predicted && r.verdict == GrowthVerdict::Divergent) ok = false;
    if (r.alpha > predicted && r.verdict == GrowthVerdict::Finite) ok = false;
  }
  return ok;
}

bool run_simulate(const Config& c, Outputs& out) {
  SolverConfig s = solver_config(c);
  const std::int64_t path = c.knobs["path"].get<std::int64_t>();
  if (path < 0 || path > std::numeric_limits<std::uint32_t>::max())
    throw DomainError("config", "experiment.path must be a 32-bit unsigned integer");
  s.snapshot_times = number_list(c.knobs["snapshot_times"], "snapshot_times");
  s.store_states = c.knobs["write_fields"].get<bool>();
  const Trajectory tr = solve_path(s, static_cast<std::uint32_t>(path));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    rows.push_back({num(tr.times[i]), num(tr.sobolev_sq[i]), num(tr.l2_sq[i])});
  out.csv("norms.csv", {"t", "sobolev_norm_sq_alpha", "l2_norm_sq"}, rows);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "u_%04zu.bin", i);
    out.field(name, inverse(tr.states[i].position));
  }
  return true;
}

bool run_validate_noise(const Config& c, Outputs& out) {
  const NoiseSpec spec = make_noise_spec(c.measure, make_grid(c.model.d, c.L, c.N));
  const int n = c.knobs["n_samples"].get<int>();
  const CovarianceReport r = validate_covariance(spec, n, c.seed, c.knobs["confidence"].get<double>());
  const ModeTable modes = mode_table(spec.grid);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.ratios.size(); ++i) {
    if (std::isnan(r.ratios[i])) continue;
    rows.push_back({std::to_string(i), num(modes.xi_norm[i]), num(r.ratios[i]), num(r.band_lo[i]), num(r.band_hi[i])});
  }
  out.csv("noise_validation.csv", {"mode", "xi_norm", "ratio", "band_lo", "band_hi"}, rows);
  out.csv("noise_summary.csv",
          {"modes_tested", "modes_outside_band", "max_rel_deviation", "max_imaginary_residue", "pass"},
          {{std::to_string(r.modes_tested), std::to_string(r.modes_outside_band), num(r.max_rel_deviation),
            num(r.max_imaginary_residue), r.pass ? "true" : "false"}});
  return r.pass;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string materialize_config(const std::string& json_text, const std::vector<std::string>& overrides,
                               const std::optional<std::string>& env_seed) {
  return parse(load(json_text, overrides, env_seed)).echo.dump(2) + "\n";
}

int run_experiment(const RunOptions& o, std::ostream& log) {
  const std::string started = now_utc();
  Config c;
  try {
    std::ifstream f(o.config_path, std::ios::binary);
    if (!f) throw DomainError("config", "cannot read config file '" + o.config_path + "'");
    std::ostringstream text;
    text << f.rdbuf();
    c = parse(load(text.str(), o.overrides, o.env_seed));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) {
    log << "error: cli: cannot create output directory '" << o.out_dir << "': " << ec.message() << "\n";
    return kExitIo;
  }
  Outputs out(o.out_dir);
  const std::string canonical = c.echo.dump();
  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));

  int code = kExitOk;
  std::string error;
  try {
    out.text("config.json", c.echo.dump(2) + "\n");
    const McOptions mc{o.workers};
    bool ok = true;
    if (c.kind == "check") ok = run_check(c, out);
    else if (c.kind == "exponents") ok = run_exponents(c, out);
    else if (c.kind == "isometry") ok = run_isometry(c, out, mc);
    else if (c.kind == "scaling") ok = run_scaling(c, out, mc);
    else if (c.kind == "frontier") ok = run_frontier(c, out, mc);
    else if (c.kind == "simulate") ok = run_simulate(c, out);
    else ok = run_validate_noise(c, out);
    if (o.check && !ok) {
      code = kExitCheckFailed;
      error = "check failed for experiment '" + c.kind + "'";
    }
  } catch (const Error& e) {
    error = e.what();
    code = e.kind() == ErrorKind::Domain ? kExitValidation : e.kind() == ErrorKind::Numerical ? kExitNumerical : kExitIo;
  } catch (const std::exception& e) {
    error = std::string("internal: ") + e.what();
    code = kExitIo;
  }
  if (!error.empty()) log << "error: " << error << "\n";

  json manifest = {{"tool", "fracwave"},
                   {"version", kToolVersion},
                   {"config_digest", std::string("fnv1a64:") + digest},
                   {"master_seed", c.seed},
                   {"workers", o.workers},
                   {"kind", c.kind},
                   {"started_at", started},
                   {"finished_at", now_utc()},
                   {"exit_code", code},
                   {"outputs", out.files()}};
  if (!error.empty()) manifest["error"] = error;
  std::ofstream m(std::filesystem::path(o.out_dir) / "manifest.json", std::ios::binary);
  m << manifest.dump(2) << "\n";
  if (!m) {
    log << "error: cli: cannot write manifest.json\n";
    return code == kExitOk ? kExitIo : code;
  }
  return code;
}

}  // namespace fracwave
