// Command-line front end. Exit codes: 0 ok, 2 configuration error,
// 3 numerical or domain failure.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxsr/config.hpp"
#include "fluxsr/csv.hpp"
#include "fluxsr/experiments.hpp"

#ifndef FLUXSR_VERSION
#define FLUXSR_VERSION "0.0.0"
#endif
#ifndef FLUXSR_PROVENANCE
#define FLUXSR_PROVENANCE "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fluxsr;

namespace {

struct Manifest {
  std::string command;
  const config::RunConfig* cfg = nullptr;
  std::optional<double> step_ns;
  json extra = json::object();
  std::vector<std::string> outputs;

  void write() const {
    json m;
    m["tool"] = "fluxsr";
    m["version"] = FLUXSR_VERSION;
    m["provenance"] = FLUXSR_PROVENANCE;
    m["command"] = command;
    m["config_hash"] = config::config_hash(cfg->effective);
    m["seed"] = cfg->seed;
    m["units"] = {
        {"config_frequencies", cfg->frequency_unit + " (ordinary frequency, converted by 2 pi)"},
        {"internal", "angular frequency in rad/ns, time in ns"},
        {"circuit_energies", "GHz (E/h)"},
        {"ip_slope", "GHz per unit frustration (2 I_p Phi_0 / h)"},
        {"intensity", "(2 g^2 / kappa) omega_c <J+J->, in (rad/ns)^2"},
    };
    m["integrator_step_ns"] = step_ns ? json(*step_ns) : json(nullptr);
    m["config"] = cfg->effective;
    m["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    fs::create_directories(cfg->out_dir);
    std::ofstream out(cfg->out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + cfg->out_dir.string());
    out << m.dump(2) << '\n';
  }
};

std::vector<std::string> list_csv(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

int cmd_spectrum(const config::RunConfig& cfg) {
  Manifest man{"spectrum", &cfg};
  {
    csv::Writer w(cfg.out_dir / "spectrum.csv", {"f", "level", "energy_ghz"});
    for (double f : cfg.flux_values) {
      const auto s = circuit::diagonalize(cfg.junction, circuit::FluxBias{f}, cfg.broadening.basis_cutoff, cfg.n_levels);
      for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) w.row(f, static_cast<unsigned long>(i), s.eigenvalues[i]);
    }
  }
  const auto fit = circuit::fit_two_level(cfg.junction, cfg.broadening.basis_cutoff);
  {
    csv::Writer w(cfg.out_dir / "qubit_params.csv",
                  {"alpha", "beta1", "beta2", "delta_ghz", "ip_slope_ghz", "ip_amperes", "fit_rms_ghz"});
    w.row(cfg.junction.alpha, cfg.junction.beta1, cfg.junction.beta2, fit.params.delta, fit.params.ip,
          circuit::ip_amperes(fit.params), fit.rms_residual);
  }
  std::cout << "delta = " << csv::format(fit.params.delta) << " GHz, ip slope = " << csv::format(fit.params.ip)
            << " GHz, I_p = " << csv::format(circuit::ip_amperes(fit.params)) << " A, fit rms = "
            << csv::format(fit.rms_residual) << " GHz\n";
  if (fit.rms_residual > cfg.broadening.fit_tolerance * fit.params.delta) {
    std::cerr << "warning: two-level fit residual exceeds fit_tolerance\n";
  }
  man.outputs = list_csv(cfg.out_dir);
  man.write();
  return 0;
}

int cmd_ensemble(const config::RunConfig& cfg, bool optimize_only) {
  auto b = cfg.broadening;
  if (optimize_only) b.out_dir.clear();
  const auto runs = experiments::run_broadening_suite(b);
  Manifest man{optimize_only ? "optimize-flux" : "ensemble", &cfg};
  man.extra["kde_variants"] = {{"kde_sum", "sum_j K((x - delta_j) / h), unnormalized"},
                               {"kde_normalized", "kde_sum / (N h)"}};
  {
    csv::Writer w(cfg.out_dir / (optimize_only ? "optimal_flux.csv" : "ensemble_summary.csv"),
                  {"sigma", "kde_fwhm_ghz", "pearson_delta_ip", "std_at_half_ghz", "f_star", "std_at_f_star_ghz"});
    for (const auto& r : runs) {
      w.row(r.sigma, r.kde_fwhm, r.pearson, r.std_at_half, r.optimum.flux.f, r.optimum.std_ghz);
      std::cout << "sigma " << csv::format(r.sigma) << ": r(delta, ip) = " << csv::format(r.pearson)
                << ", std(0.5) = " << csv::format(r.std_at_half) << " GHz, f* = " << csv::format(r.optimum.flux.f)
                << ", std(f*) = " << csv::format(r.optimum.std_ghz) << " GHz\n";
    }
  }
  if (optimize_only) {
    for (const auto& r : runs) {
      if (r.std_scan.empty()) continue;
      csv::Writer w(cfg.out_dir / ("fig5_std_vs_flux_" + experiments::sigma_label(r.sigma) + ".csv"), {"f", "std_ghz"});
      for (const auto& [f, s] : r.std_scan) w.row(f, s);
    }
  }
  man.outputs = list_csv(cfg.out_dir);
  man.write();
  return 0;
}

void print_scaling(const experiments::ScalingResult& r) {
  for (const auto& p : r.points) {
    std::cout << "M = " << csv::format(p.m) << ": max <J+J-> = " << csv::format(p.mean) << " +- "
              << csv::format(p.std_error) << '\n';
  }
  std::cout << "slope (linear window) = " << csv::format(r.slope_linear)
            << ", slope (quadratic window) = " << csv::format(r.slope_quadratic) << '\n';
}

json model_info(const config::RunConfig& cfg) {
  const auto& t = cfg.sweep.model;
  dynamics::SpinModel m = experiments::make_model(t, std::vector<double>(t.n_qubits, t.omega_bar));
  return {{"bad_cavity", m.bad_cavity()},
          {"superradiant_rate_rad_per_ns", dynamics::superradiant_rate(m)},
          {"tau_sr_at_N_ns", dynamics::sr_time(m, t.n_qubits)},
          {"tau_sr_at_1_ns", dynamics::sr_time(m, 1.0)}};
}

int cmd_discrete(const config::RunConfig& cfg) {
  config::require_superradiance(cfg, true);
  const auto r = experiments::run_discrete_m(cfg.sweep);
  print_scaling(r);
  Manifest man{"superradiance-discrete", &cfg, r.step};
  man.extra["model"] = model_info(cfg);
  man.extra["max_trace_drift"] = r.max_trace_drift;
  man.outputs = list_csv(cfg.out_dir);
  man.write();
  return 0;
}

int cmd_driven(const config::RunConfig& cfg) {
  config::require_superradiance(cfg, true);
  if (cfg.sweep.lambda_values.empty()) throw ConfigError("config field 'lambda_values': required when delta_omega = 0");
  const auto r = experiments::run_driven(cfg.sweep);
  for (const auto& p : r.table) {
    std::cout << "lambda_max = " << csv::format(p.lambda_max) << " rad/ns: M = " << csv::format(p.m_mean)
              << " (M_eff estimate " << csv::format(p.m_eff_mean) << "), max <J+J-> = " << csv::format(p.jpjm_mean)
              << '\n';
  }
  print_scaling(r.scaling);
  Manifest man{"superradiance-driven", &cfg, r.scaling.step};
  man.extra["drive_step_ns"] = r.drive_step;
  man.extra["model"] = model_info(cfg);
  man.extra["max_trace_drift"] = r.scaling.max_trace_drift;
  man.outputs = list_csv(cfg.out_dir);
  man.write();
  return 0;
}

int cmd_elimination(const config::RunConfig& cfg) {
  config::require_superradiance(cfg, false);
  const auto r = experiments::validate_elimination(cfg.elimination);
  {
    csv::Writer w(cfg.out_dir / "elimination.csv", {"time_ns", "jpjm_full", "jpjm_eliminated"});
    for (std::size_t i = 0; i < r.times.size(); ++i) w.row(r.times[i], r.full[i], r.eliminated[i]);
  }
  std::cout << "max deviation relative to peak = " << csv::format(r.peak_normalized_deviation)
            << "\nmax pointwise relative deviation = " << csv::format(r.pointwise_relative_deviation)
            << "\nmax photon number = " << csv::format(r.max_photons) << '\n';
  Manifest man{"validate-elimination", &cfg, r.step};
  man.extra["peak_normalized_deviation"] = r.peak_normalized_deviation;
  man.extra["pointwise_relative_deviation"] = r.pointwise_relative_deviation;
  man.outputs = list_csv(cfg.out_dir);
  man.write();
  return 0;
}

void report(const char* kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-qubit ensemble broadening and superradiance simulations"};
  app.set_version_flag("--version", FLUXSR_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides FLUXSR_OUT_DIR and the config)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "lowest levels and two-level parameters of one qubit"},
      {"ensemble", "sampled ensembles: KDE, (delta, ip) scatter and std vs flux"},
      {"optimize-flux", "flux that minimizes the ensemble frequency spread"},
      {"superradiance-discrete", "max <J+J-> against the number of excited qubits"},
      {"superradiance-driven", "Gaussian drive followed by collective decay"},
      {"validate-elimination", "full cavity model against the eliminated model"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    config::Overrides ov;
    ov.seed = seed;
    ov.threads = threads;
    if (out_dir) {
      ov.out_dir = *out_dir;
    } else if (const char* env = std::getenv("FLUXSR_OUT_DIR"); env && *env) {
      ov.out_dir = env;
    }
    const auto cfg = config_path.empty() ? config::parse_config("{}", ov) : config::load_config(config_path, ov);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "spectrum") return cmd_spectrum(cfg);
    if (cmd == "ensemble") return cmd_ensemble(cfg, false);
    if (cmd == "optimize-flux") return cmd_ensemble(cfg, true);
    if (cmd == "superradiance-discrete") return cmd_discrete(cfg);
    if (cmd == "superradiance-driven") return cmd_driven(cfg);
    if (cmd == "validate-elimination") return cmd_elimination(cfg);
    return 2;
  } catch (const ConfigError& e) {
    report("config", e.what());
    return 2;
  } catch (const Error& e) {
    report("numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    report("numerical", e.what());
    return 3;
  }
}
