#include "fluxsr/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fluxsr::config {

using nlohmann::json;

namespace {

const json& defaults() {
  static const json d = {
      // general
      {"seed", 1},
      {"threads", 0},
      {"out_dir", "out"},
      {"frequency_unit", "MHz"},
      // spectrum
      {"alpha", nullptr},  // defaults to mean_alpha
      {"beta1", 1.0},
      {"beta2", 1.0},
      {"flux_values", {0.5}},
      {"n_levels", 4},
      // ensemble
      {"mean_alpha", 0.7},
      {"sigma", nullptr},  // shorthand for sigmas = [sigma]
      {"sigmas", {0.005, 0.01, 0.02}},
      {"ensemble_size", 10000},
      {"ej", 200.0},
      {"ej_over_ec", 75.0},
      {"basis_cutoff", 12},
      {"fit_tolerance", 1e-2},
      {"kde_bandwidth", 0.1},
      {"kde_grid", 801},
      {"flux_min", 0.494},
      {"flux_max", 0.506},
      {"flux_grid", 121},
      // superradiance
      {"n_qubits", 10},
      {"omega_bar", nullptr},
      {"omega_c", nullptr},  // defaults to omega_bar
      {"delta_omega", nullptr},
      {"g", nullptr},
      {"kappa", nullptr},
      {"m_values", nullptr},       // defaults to 1..n_qubits
      {"lambda_values", nullptr},  // defaults to multiples of delta_omega
      {"drive_detuning", 0.0},
      {"realizations", 100},
      {"decay_window_factor", 10.0},
      {"decay_samples", 2001},
      {"decay_step_divisor", 10.0},
      {"drive_step_divisor", 200.0},
      {"timeseries_realizations", 1},
      {"linear_window", {1, 3}},
      {"quadratic_window", {5, 10}},
      // elimination check
      {"elimination_qubits", 2},
      {"photon_cutoff", 10},
      {"elimination_window_factor", 10.0},
      {"elimination_samples", 2001},
      {"elimination_step_divisor", 200.0},
  };
  return d;
}

// Default drive strengths in units of delta_omega.
constexpr double kDefaultLambdaMultiples[] = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 20.0};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config field '" + key + "': " + what);
}

double number(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "must be finite");
  return d;
}

long long integer(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long long>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) fail(key, "entries must be finite");
  }
  return out;
}

std::vector<int> integers(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) fail(key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(key, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

void positive(double v, const std::string& key) {
  if (!(v > 0.0)) fail(key, "must be > 0");
}

std::pair<int, int> window(const json& j, const std::string& key) {
  const auto w = integers(j, key);
  if (w.size() != 2 || w[0] >= w[1]) fail(key, "expected [lo, hi] with lo < hi");
  return {w[0], w[1]};
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, value] : defaults().items()) k.push_back(key);
    return k;
  }();
  return keys;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  json input;
  try {
    input = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at " + line_context(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      e.what());
  }
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : input.items()) {
    if (!defaults().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  json e = defaults();
  for (const auto& [key, value] : input.items()) e[key] = value;
  if (overrides.seed) e["seed"] = *overrides.seed;
  if (overrides.threads) e["threads"] = *overrides.threads;
  if (overrides.out_dir) e["out_dir"] = overrides.out_dir->string();

  RunConfig cfg;

  // general
  if (!e["seed"].is_number_unsigned() && !(e["seed"].is_number_integer() && e["seed"].get<long long>() >= 0)) {
    fail("seed", "expected a non-negative integer");
  }
  cfg.seed = e["seed"].get<std::uint64_t>();
  const long long threads = integer(e, "threads");
  if (threads < 0) fail("threads", "must be >= 0");
  cfg.threads = static_cast<unsigned>(threads);
  if (!e["out_dir"].is_string() || e["out_dir"].get<std::string>().empty()) fail("out_dir", "expected a path");
  cfg.out_dir = e["out_dir"].get<std::string>();
  if (!e["frequency_unit"].is_string()) fail("frequency_unit", "expected \"MHz\" or \"GHz\"");
  cfg.frequency_unit = e["frequency_unit"].get<std::string>();
  double to_angular = 0.0;
  if (cfg.frequency_unit == "MHz") {
    to_angular = units::mhz_to_rad_per_ns(1.0);
  } else if (cfg.frequency_unit == "GHz") {
    to_angular = units::ghz_to_rad_per_ns(1.0);
  } else {
    fail("frequency_unit", "expected \"MHz\" or \"GHz\"");
  }

  // circuit and ensemble
  auto& b = cfg.broadening;
  b.base.mean_alpha = number(e, "mean_alpha");
  if (!(b.base.mean_alpha > 0.55)) fail("mean_alpha", "must be > 0.55");
  if (e["alpha"].is_null()) e["alpha"] = e["mean_alpha"];
  cfg.junction.alpha = number(e, "alpha");
  cfg.junction.beta1 = number(e, "beta1");
  cfg.junction.beta2 = number(e, "beta2");
  cfg.junction.ej = number(e, "ej");
  cfg.junction.ej_over_ec = number(e, "ej_over_ec");
  if (!(cfg.junction.alpha > 0.5)) fail("alpha", "must be > 0.5");
  positive(cfg.junction.beta1, "beta1");
  positive(cfg.junction.beta2, "beta2");
  positive(cfg.junction.ej, "ej");
  positive(cfg.junction.ej_over_ec, "ej_over_ec");
  cfg.flux_values = numbers(e, "flux_values");
  if (cfg.flux_values.empty()) fail("flux_values", "must not be empty");
  cfg.n_levels = static_cast<int>(integer(e, "n_levels"));
  if (cfg.n_levels < 2) fail("n_levels", "must be >= 2");

  b.base.n_qubits = static_cast<int>(integer(e, "ensemble_size"));
  if (b.base.n_qubits < 1) fail("ensemble_size", "must be >= 1");
  b.base.seed = cfg.seed;
  b.base.ej = cfg.junction.ej;
  b.base.ej_over_ec = cfg.junction.ej_over_ec;
  if (!e["sigma"].is_null()) {
    const double s = number(e, "sigma");
    if (!(s >= 0.0 && s < 0.2)) fail("sigma", "must lie in [0, 0.2)");
    e["sigmas"] = json::array({s});
  }
  b.sigmas = numbers(e, "sigmas");
  if (b.sigmas.empty()) fail("sigmas", "must not be empty");
  for (double s : b.sigmas) {
    if (!(s >= 0.0 && s < 0.2)) fail("sigmas", "entries must lie in [0, 0.2)");
  }
  b.basis_cutoff = static_cast<int>(integer(e, "basis_cutoff"));
  if (b.basis_cutoff < 5) fail("basis_cutoff", "must be >= 5");
  b.fit_tolerance = number(e, "fit_tolerance");
  positive(b.fit_tolerance, "fit_tolerance");
  b.kde.bandwidth = number(e, "kde_bandwidth");
  positive(b.kde.bandwidth, "kde_bandwidth");
  b.kde_grid = static_cast<int>(integer(e, "kde_grid"));
  if (b.kde_grid < 3) fail("kde_grid", "must be >= 3");
  b.flux.lo = number(e, "flux_min");
  b.flux.hi = number(e, "flux_max");
  if (!(b.flux.hi > b.flux.lo)) fail("flux_max", "must exceed flux_min");
  b.flux_grid = static_cast<int>(integer(e, "flux_grid"));
  if (b.flux_grid < 3) fail("flux_grid", "must be >= 3");
  b.threads = cfg.threads;
  b.out_dir = cfg.out_dir;

  // superradiance
  auto& s = cfg.sweep;
  auto& t = s.model;
  t.n_qubits = static_cast<int>(integer(e, "n_qubits"));
  if (t.n_qubits < 1 || t.n_qubits > dynamics::kMaxBlockQubits) {
    fail("n_qubits", "must lie in [1, " + std::to_string(dynamics::kMaxBlockQubits) + "]");
  }
  auto spin_frequency = [&](const std::string& key, double& target, bool nonnegative) {
    if (e[key].is_null()) {
      cfg.missing.push_back(key);
      return;
    }
    const double v = number(e, key);
    if (nonnegative && v < 0.0) fail(key, "must be >= 0");
    target = v * to_angular;
  };
  spin_frequency("omega_bar", t.omega_bar, false);
  spin_frequency("delta_omega", t.delta_omega, true);
  spin_frequency("g", t.g, true);
  spin_frequency("kappa", t.kappa, true);
  if (!e["g"].is_null()) positive(t.g, "g");
  if (!e["kappa"].is_null()) positive(t.kappa, "kappa");
  if (e["omega_c"].is_null()) {
    t.omega_c = t.omega_bar;
  } else {
    t.omega_c = number(e, "omega_c") * to_angular;
  }

  if (e["m_values"].is_null()) {
    json m = json::array();
    for (int i = 1; i <= t.n_qubits; ++i) m.push_back(i);
    e["m_values"] = m;
  }
  s.m_values = integers(e, "m_values");
  for (std::size_t i = 0; i < s.m_values.size(); ++i) {
    if (s.m_values[i] < 1 || s.m_values[i] > t.n_qubits) fail("m_values", "entries must lie in [1, n_qubits]");
    if (i > 0 && s.m_values[i] <= s.m_values[i - 1]) fail("m_values", "must be strictly increasing");
  }
  if (e["lambda_values"].is_null() && !e["delta_omega"].is_null() && t.delta_omega > 0.0) {
    json l = json::array();
    for (double k : kDefaultLambdaMultiples) l.push_back(k * number(e, "delta_omega"));
    e["lambda_values"] = l;
  }
  if (!e["lambda_values"].is_null()) {
    for (double l : numbers(e, "lambda_values")) {
      if (!(l > 0.0)) fail("lambda_values", "entries must be > 0");
      s.lambda_values.push_back(l * to_angular);
    }
  }
  s.drive_detuning = number(e, "drive_detuning") * to_angular;
  s.realizations = static_cast<int>(integer(e, "realizations"));
  if (s.realizations < 1) fail("realizations", "must be >= 1");
  s.seed = cfg.seed;
  s.threads = cfg.threads;
  s.decay_window_factor = number(e, "decay_window_factor");
  positive(s.decay_window_factor, "decay_window_factor");
  s.decay_samples = static_cast<int>(integer(e, "decay_samples"));
  if (s.decay_samples < 2) fail("decay_samples", "must be >= 2");
  s.decay_step_divisor = number(e, "decay_step_divisor");
  if (!(s.decay_step_divisor >= 1.0)) fail("decay_step_divisor", "must be >= 1");
  s.drive_step_divisor = number(e, "drive_step_divisor");
  if (!(s.drive_step_divisor >= 1.0)) fail("drive_step_divisor", "must be >= 1");
  s.timeseries_realizations = static_cast<int>(integer(e, "timeseries_realizations"));
  if (s.timeseries_realizations < 0) fail("timeseries_realizations", "must be >= 0");
  std::tie(s.linear_lo, s.linear_hi) = window(e, "linear_window");
  std::tie(s.quadratic_lo, s.quadratic_hi) = window(e, "quadratic_window");
  s.out_dir = cfg.out_dir;

  auto& el = cfg.elimination;
  el.model = t;
  el.model.n_qubits = static_cast<int>(integer(e, "elimination_qubits"));
  if (el.model.n_qubits < 1 || el.model.n_qubits > dynamics::kMaxTavisCummingsQubits) {
    fail("elimination_qubits", "must lie in [1, " + std::to_string(dynamics::kMaxTavisCummingsQubits) + "]");
  }
  el.model.delta_omega = 0.0;  // the cross-check is run on resonance with identical qubits
  el.seed = cfg.seed;
  el.photon_cutoff = static_cast<int>(integer(e, "photon_cutoff"));
  if (el.photon_cutoff < 1 || el.photon_cutoff > dynamics::kMaxPhotonCutoff) {
    fail("photon_cutoff", "must lie in [1, " + std::to_string(dynamics::kMaxPhotonCutoff) + "]");
  }
  el.window_factor = number(e, "elimination_window_factor");
  positive(el.window_factor, "elimination_window_factor");
  el.samples = static_cast<int>(integer(e, "elimination_samples"));
  if (el.samples < 2) fail("elimination_samples", "must be >= 2");
  el.step_divisor = number(e, "elimination_step_divisor");
  if (!(el.step_divisor >= 1.0)) fail("elimination_step_divisor", "must be >= 1");

  cfg.effective = e;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

void require_superradiance(const RunConfig& cfg, bool needs_delta_omega) {
  for (const std::string key : {"omega_bar", "g", "kappa", "delta_omega"}) {
    if (key == "delta_omega" && !needs_delta_omega) continue;
    if (std::find(cfg.missing.begin(), cfg.missing.end(), key) != cfg.missing.end()) {
      fail(key, "required for superradiance commands");
    }
  }
}

std::string config_hash(const nlohmann::json& effective) {
  const std::string text = effective.dump();  // object keys are sorted
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fluxsr::config
