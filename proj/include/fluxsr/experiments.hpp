#pragma once

// Figure pipelines: ensemble broadening (distributions, correlation, flux
// optimization) and the superradiance sweeps over excited number M or drive
// strength, averaged over random draws of the qubit frequencies.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fluxsr/collective_decay.hpp"
#include "fluxsr/ensemble.hpp"
#include "fluxsr/model.hpp"

namespace fluxsr::experiments {

using dynamics::SpinModel;

// Ensemble parameters shared by every realization; angular units (rad/ns).
struct SpinTemplate {
  int n_qubits = 10;
  double omega_bar = 0.0;
  double delta_omega = 0.0;
  double omega_c = 0.0;
  double g = 0.0;
  double kappa = 0.0;

  void validate() const;  // ConfigError naming the offending field
};

struct SweepConfig {
  SpinTemplate model;
  std::vector<int> m_values;             // discrete sweep
  std::vector<double> lambda_values;     // driven sweep, rad/ns
  double drive_detuning = 0.0;           // omega_d - omega_bar, rad/ns
  int realizations = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;                  // 0 = hardware concurrency
  double decay_window_factor = 10.0;     // window = factor * tau_sr(M = 1)
  int decay_samples = 2001;
  double decay_step_divisor = 10.0;
  double drive_step_divisor = 200.0;
  // The first k realizations run over the full window and their mean time
  // series is kept; the rest stop once the maximum is resolved.
  int timeseries_realizations = 1;
  int linear_lo = 1, linear_hi = 3;      // slope windows in M
  int quadratic_lo = 5, quadratic_hi = 10;
  std::filesystem::path out_dir;         // empty = no files

  void validate() const;
};

struct ScalingPoint {
  double m = 0.0;          // excited number (mean over realizations when driven)
  double mean = 0.0;       // mean of max <J+J->
  double stddev = 0.0;     // population std over realizations
  double std_error = 0.0;  // stddev / sqrt(realizations)
  std::vector<double> samples;  // max <J+J-> per realization
};

struct MeanSeries {
  std::vector<double> times;
  std::vector<double> jpjm;
  std::vector<double> excited_count;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;  // m strictly increasing
  double slope_linear = 0.0;
  double slope_quadratic = 0.0;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  double step = 0.0;  // largest decay step used, ns
  std::vector<MeanSeries> series;  // per point, when recorded
};

struct DrivenPoint {
  double lambda_max = 0.0;
  double m_mean = 0.0;
  double m_std = 0.0;
  double m_eff_mean = 0.0;  // m_eff_estimate at lambda_max
  double jpjm_mean = 0.0;
  double jpjm_std = 0.0;
  std::vector<double> m_samples;
  std::vector<double> jpjm_samples;
};

struct DrivenResult {
  std::vector<DrivenPoint> table;  // in the order of cfg.lambda_values
  ScalingResult scaling;           // points sorted by mean M
  double drive_step = 0.0;
};

// Qubit frequencies of one realization: N(omega_bar, delta_omega), keyed by
// (seed, realization) and shared by every M and lambda of a sweep.
std::vector<double> draw_frequencies(const SpinTemplate& t, std::uint64_t seed, std::uint64_t realization);

SpinModel make_model(const SpinTemplate& t, std::vector<double> omegas);

// Decay options: window factor * tau_sr(1), step
// min(tau_sr(M), 1/max|omega_j - omega_bar|) / divisor.
dynamics::DecayOptions decay_options(const SpinModel& m, double excited, const SweepConfig& cfg,
                                     bool full_window);

// Final single-qubit states after the Gaussian drive over [0, 2b], cavity off.
std::vector<dynamics::Qubit2> drive_qubits(const SpinModel& m, const dynamics::DriveSpec& d,
                                           double step_divisor, double* step_used = nullptr);

ScalingResult run_discrete_m(const SweepConfig& cfg);
DrivenResult run_driven(const SweepConfig& cfg);

// sum_j lambda^2 / (Delta'_j^2 + lambda^2), Delta'_j = omega_j - omega_d.
double m_eff_estimate(const std::vector<double>& omegas, double omega_d, double lambda);

// (M_t g_t^2 / kappa_t) / (M_r g_r^2 / kappa_r).
double extrapolate_equivalence(const SpinModel& target, const SpinModel& reference, double m_target,
                               double m_reference);

// Ordinary least squares slope of log(value) against log(m) over points with
// lo <= m <= hi. Needs two distinct m values in the window.
double loglog_slope(const std::vector<ScalingPoint>& points, double lo, double hi);

// Linear interpolation of the mean max <J+J-> at m; the points must bracket m.
double interpolate_scaling(const std::vector<ScalingPoint>& points, double m);

// Full Tavis-Cummings (cavity kept) against the eliminated model, both from
// all qubits excited and the cavity empty, over [0, window_factor tau_sr(N)].
struct EliminationConfig {
  SpinTemplate model;       // omegas are drawn as in the sweeps unless delta_omega = 0
  std::uint64_t seed = 1;
  int photon_cutoff = 10;
  double window_factor = 10.0;
  int samples = 2001;
  double step_divisor = 200.0;
};

struct EliminationResult {
  std::vector<double> times;
  std::vector<double> full;        // <J+J-> with the cavity
  std::vector<double> eliminated;  // <J+J-> of H_AE + S
  // max |full - eliminated| / max eliminated
  double peak_normalized_deviation = 0.0;
  // max |full - eliminated| / eliminated over samples where eliminated > 0
  double pointwise_relative_deviation = 0.0;
  double max_trace_drift = 0.0;
  double max_photons = 0.0;
  double step = 0.0;  // integrator step, ns
};

EliminationResult validate_elimination(const EliminationConfig& cfg);

// Distributions, correlation and std-vs-flux for several junction spreads.
struct BroadeningConfig {
  ensemble::SamplingConfig base;               // sigmas overwritten per run
  std::vector<double> sigmas{0.005, 0.01, 0.02};  // relative, applied to all junctions
  int basis_cutoff = circuit::kDefaultBasisCutoff;
  double fit_tolerance = circuit::kDefaultFitTolerance;
  ensemble::KdeConfig kde;
  ensemble::FluxInterval flux;
  int flux_grid = ensemble::kDefaultFluxGrid;
  int kde_grid = 801;
  unsigned threads = 0;
  std::filesystem::path out_dir;
};

struct BroadeningRun {
  double sigma = 0.0;
  ensemble::EnsembleSample sample;
  double kde_fwhm = 0.0;
  double pearson = 0.0;  // r(delta, ip)
  double std_at_half = 0.0;
  ensemble::FluxOptimum optimum;
  std::vector<std::pair<double, double>> std_scan;
};

std::vector<BroadeningRun> run_broadening_suite(const BroadeningConfig& cfg);

// Output file names.
std::string sigma_label(double sigma);  // 0.01 -> "0.01"
void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& r);
void write_lambda_table_csv(const std::filesystem::path& path, const DrivenResult& r);
void write_series_csv(const std::filesystem::path& path, const SpinModel& m, const MeanSeries& s);

}  // namespace fluxsr::experiments
