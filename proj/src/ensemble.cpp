#include "fluxsr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fluxsr/parallel.hpp"
#include "fluxsr/rng.hpp"

namespace fluxsr::ensemble {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267794;

double gaussian_kernel(double x) { return kInvSqrtTwoPi * std::exp(-0.5 * x * x); }

}  // namespace

void SamplingConfig::validate() const {
  if (!(mean_alpha > 0.55)) throw ConfigError("mean_alpha must exceed 0.55");
  for (double s : {sigma_s, sigma_l1, sigma_l2}) {
    if (!(s >= 0.0 && s < 0.2)) throw ConfigError("sigma values must lie in [0, 0.2)");
  }
  if (n_qubits < 1) throw ConfigError("n_qubits must be >= 1");
  if (!(ej_over_ec > 0.0)) throw ConfigError("ej_over_ec must be > 0");
  if (!(ej > 0.0)) throw ConfigError("ej must be > 0");
}

JunctionSet sample_junctions(const SamplingConfig& cfg, std::uint64_t index) {
  auto engine = keyed_engine(cfg.seed, RngStream::junctions, index);
  std::normal_distribution<double> normal(0.0, 1.0);

  JunctionSet j;
  j.ej = cfg.ej;
  j.ej_over_ec = cfg.ej_over_ec;
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    j.alpha = cfg.mean_alpha * (1.0 + cfg.sigma_s * normal(engine));
    j.beta1 = 1.0 + cfg.sigma_l1 * normal(engine);
    j.beta2 = 1.0 + cfg.sigma_l2 * normal(engine);
    if (j.alpha > 0.55 && j.beta1 > 0.5 && j.beta2 > 0.5) return j;
  }
  throw ConfigError("sampling configuration produced " + std::to_string(kMaxRedraws) +
                    " rejected junction draws in a row");
}

EnsembleSample build_ensemble(const SamplingConfig& cfg, int basis_cutoff, unsigned threads,
                              double fit_tolerance) {
  cfg.validate();
  EnsembleSample out;
  out.config = cfg;
  const auto n = static_cast<std::size_t>(cfg.n_qubits);
  out.qubits.resize(n);
  out.junctions.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      out.junctions[i] = sample_junctions(cfg, i);
      out.qubits[i] = circuit::extract_qubit_params(out.junctions[i], basis_cutoff, fit_tolerance);
    } catch (const NumericalError& e) {
      throw NumericalError("qubit " + std::to_string(i) + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("qubit " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

double kde(std::span<const double> values, const KdeConfig& cfg, double query) {
  double sum = 0.0;
  for (double v : values) sum += gaussian_kernel((query - v) / cfg.bandwidth);
  return sum;
}

double kde_normalized(std::span<const double> values, const KdeConfig& cfg, double query) {
  return kde(values, cfg, query) / (static_cast<double>(values.size()) * cfg.bandwidth);
}

double kde_fwhm(std::span<const double> values, const KdeConfig& cfg, int n_grid) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 5.0 * cfg.bandwidth;
  const double hi = *hi_it + 5.0 * cfg.bandwidth;
  const double step = (hi - lo) / (n_grid - 1);

  std::vector<double> density(static_cast<std::size_t>(n_grid));
  for (int i = 0; i < n_grid; ++i) density[i] = kde(values, cfg, lo + step * i);
  const auto peak = std::max_element(density.begin(), density.end());
  const double half = 0.5 * *peak;

  // Outermost half-maximum crossings, linearly interpolated.
  auto first = std::find_if(density.begin(), density.end(), [&](double d) { return d >= half; });
  auto last = std::find_if(density.rbegin(), density.rend(), [&](double d) { return d >= half; });
  const auto i0 = static_cast<std::size_t>(first - density.begin());
  const auto i1 = static_cast<std::size_t>(density.rend() - last - 1);
  auto crossing = [&](std::size_t below, std::size_t above) {
    const double t = (half - density[below]) / (density[above] - density[below]);
    return lo + step * (static_cast<double>(below) + t * (static_cast<double>(above) - static_cast<double>(below)));
  };
  const double left = i0 == 0 ? lo : crossing(i0 - 1, i0);
  const double right = i1 + 1 >= density.size() ? hi : crossing(i1 + 1, i1);
  return right - left;
}

double qubit_frequency(const QubitParams& q, FluxBias f) {
  return std::hypot(q.ip * (f.f - 0.5), q.delta);
}

double ensemble_std(std::span<const QubitParams> qubits, FluxBias f) {
  std::vector<double> w(qubits.size());
  std::transform(qubits.begin(), qubits.end(), w.begin(),
                 [&](const QubitParams& q) { return qubit_frequency(q, f); });
  return stddev(w);
}

double ensemble_std(const EnsembleSample& e, FluxBias f) { return ensemble_std(e.qubits, f); }

double balancing_flux(const QubitParams& q1, const QubitParams& q2) {
  if (q1.delta == q2.delta) return 0.0;
  if (!((q1.delta - q2.delta) * (q2.ip - q1.ip) > 0.0)) {
    throw DomainError(
        "no balancing flux exists: the qubit with the larger delta must have the smaller "
        "persistent current");
  }
  const double num = (q1.delta - q2.delta) * (q1.delta + q2.delta);
  const double den = (q2.ip - q1.ip) * (q2.ip + q1.ip);
  return std::sqrt(num / den);
}

double golden_section_minimize(const std::function<double(double)>& fn, double lo, double hi,
                               double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = rel_tol * std::max(std::abs(lo), std::abs(hi));
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = fn(c);
  double fd = fn(d);
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = fn(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = fn(d);
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> std_vs_flux(std::span<const QubitParams> qubits,
                                                   FluxInterval range, int n_grid) {
  if (n_grid < 2) throw DomainError("n_grid must be >= 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n_grid));
  const double step = (range.hi - range.lo) / (n_grid - 1);
  for (int i = 0; i < n_grid; ++i) {
    const double f = i == n_grid - 1 ? range.hi : range.lo + step * i;
    out.emplace_back(f, ensemble_std(qubits, FluxBias{f}));
  }
  return out;
}

FluxOptimum optimal_flux(std::span<const QubitParams> qubits, FluxInterval range, int n_grid) {
  if (n_grid < 3) throw DomainError("n_grid must be >= 3");
  if (!(range.hi > range.lo)) throw DomainError("flux range must have hi > lo");
  if (qubits.size() < 2) throw DomainError("ensemble_std needs at least two qubits");

  const auto scan = std_vs_flux(qubits, range, n_grid);
  double lo_val = scan.front().second, hi_val = lo_val;
  for (const auto& [f, s] : scan) {
    lo_val = std::min(lo_val, s);
    hi_val = std::max(hi_val, s);
  }

  // Values within this band are treated as equal.
  std::vector<double> freq(qubits.size());
  std::transform(qubits.begin(), qubits.end(), freq.begin(),
                 [](const QubitParams& q) { return q.delta; });
  const double tie = 1e-12 * std::max(std::abs(mean(freq)), hi_val);

  if (hi_val - lo_val <= tie) {
    const double mid = 0.5 * (range.lo + range.hi);
    return {FluxBias{mid}, ensemble_std(qubits, FluxBias{mid})};
  }

  std::size_t best = 0;
  while (scan[best].second > lo_val + tie) ++best;

  const double a = scan[best == 0 ? 0 : best - 1].first;
  const double b = scan[std::min(best + 1, scan.size() - 1)].first;
  auto objective = [&](double f) { return ensemble_std(qubits, FluxBias{f}); };
  const double f_star = golden_section_minimize(objective, a, b, 1e-6);

  FluxOptimum out{FluxBias{f_star}, objective(f_star)};
  // The refinement never does worse than the grid point it started from.
  if (scan[best].second < out.std_ghz) out = {FluxBias{scan[best].first}, scan[best].second};
  return out;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson needs two equal samples of size >= 2");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

std::vector<double> deltas(std::span<const QubitParams> qubits) {
  std::vector<double> out(qubits.size());
  std::transform(qubits.begin(), qubits.end(), out.begin(), [](const QubitParams& q) { return q.delta; });
  return out;
}

std::vector<double> ips(std::span<const QubitParams> qubits) {
  std::vector<double> out(qubits.size());
  std::transform(qubits.begin(), qubits.end(), out.begin(), [](const QubitParams& q) { return q.ip; });
  return out;
}

}  // namespace fluxsr::ensemble
