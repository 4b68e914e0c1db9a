#pragma once

// Monte-Carlo fabrication variation of flux-qubit ensembles, density
// estimation of the resulting parameters, and the global-flux optimization of
// the ensemble frequency spread.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fluxsr/circuit.hpp"

namespace fluxsr::ensemble {

using circuit::FluxBias;
using circuit::JunctionSet;
using circuit::QubitParams;

struct SamplingConfig {
  double mean_alpha = 0.7;
  double sigma_s = 0.01;   // relative std of the small junction area
  double sigma_l1 = 0.01;  // relative std of large junction 1
  double sigma_l2 = 0.01;  // relative std of large junction 2
  int n_qubits = 10000;
  std::uint64_t seed = 1;
  double ej_over_ec = 75.0;
  double ej = 200.0;  // GHz

  void validate() const;
};

struct EnsembleSample {
  std::vector<QubitParams> qubits;
  std::vector<JunctionSet> junctions;  // junctions[i] generated qubits[i]
  SamplingConfig config;
};

struct KdeConfig {
  double bandwidth = 0.1;  // GHz
};

// Redraws above this count signal an unusable sampling configuration.
inline constexpr int kMaxRedraws = 1000;

// Junctions for qubit `index`, a pure function of (cfg.seed, index).
// alpha ~ N(mean_alpha, sigma_s mean_alpha), beta_k ~ N(1, sigma_lk), redrawn
// until alpha > 0.55 and both beta_k > 0.5.
JunctionSet sample_junctions(const SamplingConfig& cfg, std::uint64_t index);

// Maps sample_junctions through circuit::extract_qubit_params for indices
// 0..n_qubits-1 on up to `threads` workers (0 = hardware concurrency).
// Circuit errors are rethrown with the failing index attached.
EnsembleSample build_ensemble(const SamplingConfig& cfg,
                              int basis_cutoff = circuit::kDefaultBasisCutoff, unsigned threads = 0,
                              double fit_tolerance = circuit::kDefaultFitTolerance);

// sum_j K((query - v_j) / h) with K the standard normal density.
double kde(std::span<const double> values, const KdeConfig& cfg, double query);

// kde / (N h), integrates to one.
double kde_normalized(std::span<const double> values, const KdeConfig& cfg, double query);

// Full width at half maximum of the normalized KDE, evaluated on a grid of
// `n_grid` points covering the data range padded by 5 bandwidths.
double kde_fwhm(std::span<const double> values, const KdeConfig& cfg, int n_grid = 4001);

// sqrt((ip (f - 1/2))^2 + delta^2), GHz.
double qubit_frequency(const QubitParams& q, FluxBias f);

// Population standard deviation of the qubit frequencies at flux f.
double ensemble_std(std::span<const QubitParams> qubits, FluxBias f);
double ensemble_std(const EnsembleSample& e, FluxBias f);

// Offset df >= 0 such that both qubits have equal frequency at 1/2 +- df.
// Requires (delta1 - delta2)(ip2 - ip1) > 0, or delta1 == delta2 (df = 0).
double balancing_flux(const QubitParams& q1, const QubitParams& q2);

struct FluxInterval {
  double lo = 0.494;
  double hi = 0.506;
};

inline constexpr int kDefaultFluxGrid = 121;

struct FluxOptimum {
  FluxBias flux;
  double std_ghz = 0.0;
};

// Grid scan of ensemble_std over `range`, then golden-section refinement of
// the best grid point to relative tolerance 1e-6. Ties go to the lowest f; a
// flat landscape returns the range midpoint.
FluxOptimum optimal_flux(std::span<const QubitParams> qubits, FluxInterval range = {},
                         int n_grid = kDefaultFluxGrid);

// (f, std) pairs on an evenly spaced grid including both ends.
std::vector<std::pair<double, double>> std_vs_flux(std::span<const QubitParams> qubits,
                                                   FluxInterval range = {},
                                                   int n_grid = kDefaultFluxGrid);

// Minimizer of a unimodal function on [lo, hi]; stops when the bracket is
// below rel_tol * max(|lo|, |hi|).
double golden_section_minimize(const std::function<double(double)>& fn, double lo, double hi,
                               double rel_tol = 1e-6);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
// Population standard deviation.
double stddev(std::span<const double> x);

std::vector<double> deltas(std::span<const QubitParams> qubits);
std::vector<double> ips(std::span<const QubitParams> qubits);

}  // namespace fluxsr::ensemble
