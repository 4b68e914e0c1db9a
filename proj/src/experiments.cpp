#include "fluxsr/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fluxsr/csv.hpp"
#include "fluxsr/parallel.hpp"
#include "fluxsr/rng.hpp"

namespace fluxsr::experiments {

using namespace dynamics;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double max_abs_detuning(const SpinModel& m) {
  double d = 0.0;
  for (double w : m.omegas) d = std::max(d, std::abs(w - m.omega_bar));
  return d;
}

struct Moments {
  double mean = 0.0, stddev = 0.0, std_error = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments out;
  out.mean = ensemble::mean(v);
  out.stddev = ensemble::stddev(v);
  out.std_error = out.stddev / std::sqrt(static_cast<double>(v.size()));
  return out;
}

// Adds series b into the running sum a (same sample times).
void accumulate(MeanSeries& a, const TimeSeries& b) {
  const auto& jpjm = b["jpjm"];
  const auto& count = b["excited_count"];
  if (a.times.empty()) {
    a.times = b.times;
    a.jpjm.assign(b.times.size(), 0.0);
    a.excited_count.assign(b.times.size(), 0.0);
  }
  for (std::size_t i = 0; i < b.times.size(); ++i) {
    a.jpjm[i] += jpjm[i];
    a.excited_count[i] += count[i];
  }
}

void scale(MeanSeries& a, double k) {
  for (auto& v : a.jpjm) v *= k;
  for (auto& v : a.excited_count) v *= k;
}

void fill_slopes(ScalingResult& r, const SweepConfig& cfg) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto slope = [&](int lo, int hi) {
    int count = 0;
    for (const auto& p : r.points) count += p.m >= lo && p.m <= hi;
    return count >= 2 ? loglog_slope(r.points, lo, hi) : nan;
  };
  r.slope_linear = slope(cfg.linear_lo, cfg.linear_hi);
  r.slope_quadratic = slope(cfg.quadratic_lo, cfg.quadratic_hi);
}

}  // namespace

void SpinTemplate::validate() const {
  require(n_qubits >= 1 && n_qubits <= kMaxBlockQubits,
          "n_qubits must lie in [1, " + std::to_string(kMaxBlockQubits) + "]");
  require(std::isfinite(g) && g > 0.0, "g must be > 0");
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
  require(std::isfinite(delta_omega) && delta_omega >= 0.0, "delta_omega must be >= 0");
  require(std::isfinite(omega_bar), "omega_bar must be finite");
  require(std::isfinite(omega_c), "omega_c must be finite");
}

void SweepConfig::validate() const {
  model.validate();
  require(realizations >= 1, "realizations must be >= 1");
  for (int m : m_values) require(m >= 1 && m <= model.n_qubits, "m_values must lie in [1, n_qubits]");
  for (std::size_t i = 1; i < m_values.size(); ++i) {
    require(m_values[i] > m_values[i - 1], "m_values must be strictly increasing");
  }
  for (double l : lambda_values) require(std::isfinite(l) && l > 0.0, "lambda_values must be > 0");
  require(std::isfinite(drive_detuning), "drive_detuning must be finite");
  require(decay_window_factor > 0.0, "decay_window_factor must be > 0");
  require(decay_samples >= 2, "decay_samples must be >= 2");
  require(decay_step_divisor >= 1.0, "decay_step_divisor must be >= 1");
  require(drive_step_divisor >= 1.0, "drive_step_divisor must be >= 1");
  require(timeseries_realizations >= 0, "timeseries_realizations must be >= 0");
  require(linear_lo < linear_hi && quadratic_lo < quadratic_hi, "slope windows need lo < hi");
}

std::vector<double> draw_frequencies(const SpinTemplate& t, std::uint64_t seed, std::uint64_t realization) {
  auto engine = keyed_engine(seed, RngStream::spin_frequencies, realization);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> omegas(static_cast<std::size_t>(t.n_qubits));
  for (auto& w : omegas) w = t.omega_bar + t.delta_omega * normal(engine);
  return omegas;
}

SpinModel make_model(const SpinTemplate& t, std::vector<double> omegas) {
  SpinModel m;
  m.omegas = std::move(omegas);
  m.omega_bar = t.omega_bar;
  m.delta_omega = t.delta_omega;
  m.omega_c = t.omega_c;
  m.g = t.g;
  m.kappa = t.kappa;
  m.validate();
  return m;
}

DecayOptions decay_options(const SpinModel& m, double excited, const SweepConfig& cfg, bool full_window) {
  DecayOptions o;
  o.t1 = cfg.decay_window_factor * sr_time(m, 1.0);
  o.samples = cfg.decay_samples;
  o.max_step = StepPolicy{sr_time(m, std::max(excited, 1.0)), 0.0, max_abs_detuning(m), cfg.decay_step_divisor}.step();
  o.stop_when_max_resolved = !full_window;
  return o;
}

std::vector<Qubit2> drive_qubits(const SpinModel& m, const DriveSpec& d, double step_divisor, double* step_used) {
  d.validate();
  double max_detuning = 0.0;
  for (double w : m.omegas) max_detuning = std::max(max_detuning, std::abs(w - d.omega_d));

  EvolveOptions o;
  o.t0 = 0.0;
  o.t1 = d.window();
  o.samples = 2;
  o.max_step = StepPolicy{0.0, d.lambda_max, max_detuning, step_divisor}.step();

  const OperatorMatrix sz = sigma_z(1, 0);
  const OperatorMatrix sx = sigma_x(1, 0);
  const StateMatrix ground = basis_state(1, 0);
  std::vector<Qubit2> out;
  out.reserve(m.omegas.size());
  for (double w : m.omegas) {
    TimeDependentHamiltonian h;
    h.constant = (0.5 * (w - d.omega_d)) * sz;
    h.terms.push_back({[d](double t) { return 0.5 * d.envelope(t); }, sx});
    const auto r = evolve(ground, h, {}, o, {});
    out.emplace_back(r.final_state);
    if (step_used) *step_used = r.step;
  }
  return out;
}

ScalingResult run_discrete_m(const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t n_m = cfg.m_values.size();
  const auto n_r = static_cast<std::size_t>(cfg.realizations);

  struct Job {
    DecayResult result;
  };
  std::vector<Job> jobs(n_m * n_r);
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t mi = k / n_r, r = k % n_r;
    const int M = cfg.m_values[mi];
    const SpinModel model = make_model(cfg.model, draw_frequencies(cfg.model, cfg.seed, r));
    const CollectiveDecaySolver solver(eliminated_model(model));
    const auto initial = solver.basis_state((1u << M) - 1u);
    const bool full = static_cast<int>(r) < cfg.timeseries_realizations;
    jobs[k].result = solver.run(initial, decay_options(model, M, cfg, full));
    if (!full) jobs[k].result.series = {};
  });

  ScalingResult out;
  out.series.resize(n_m);
  for (std::size_t mi = 0; mi < n_m; ++mi) {
    ScalingPoint p;
    p.m = cfg.m_values[mi];
    int recorded = 0;
    for (std::size_t r = 0; r < n_r; ++r) {
      const auto& res = jobs[mi * n_r + r].result;
      p.samples.push_back(res.max_jpjm);
      out.max_trace_drift = std::max(out.max_trace_drift, res.max_trace_drift);
      out.max_hermiticity_drift = std::max(out.max_hermiticity_drift, res.max_hermiticity_drift);
      out.step = std::max(out.step, res.step);
      if (static_cast<int>(r) < cfg.timeseries_realizations) {
        accumulate(out.series[mi], res.series);
        ++recorded;
      }
    }
    if (recorded > 0) scale(out.series[mi], 1.0 / recorded);
    const auto mo = moments(p.samples);
    p.mean = mo.mean;
    p.stddev = mo.stddev;
    p.std_error = mo.std_error;
    out.points.push_back(std::move(p));
  }
  fill_slopes(out, cfg);

  if (!cfg.out_dir.empty()) {
    write_scaling_csv(cfg.out_dir / "fig7a_scaling.csv", out);
    if (cfg.timeseries_realizations > 0) {
      const SpinModel reference = make_model(cfg.model, draw_frequencies(cfg.model, cfg.seed, 0));
      for (std::size_t mi = 0; mi < n_m; ++mi) {
        write_series_csv(cfg.out_dir / ("fig7de_timeseries_" + std::to_string(cfg.m_values[mi]) + ".csv"),
                         reference, out.series[mi]);
      }
    }
  }
  return out;
}

DrivenResult run_driven(const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t n_l = cfg.lambda_values.size();
  const auto n_r = static_cast<std::size_t>(cfg.realizations);

  struct Job {
    double m = 0.0;
    double m_eff = 0.0;
    double drive_step = 0.0;
    DecayResult result;
  };
  std::vector<Job> jobs(n_l * n_r);
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t li = k / n_r, r = k % n_r;
    const SpinModel model = make_model(cfg.model, draw_frequencies(cfg.model, cfg.seed, r));
    const DriveSpec drive{cfg.lambda_values[li], cfg.model.omega_bar + cfg.drive_detuning};
    Job& job = jobs[k];
    const auto qubits = drive_qubits(model, drive, cfg.drive_step_divisor, &job.drive_step);
    for (const auto& q : qubits) job.m += q(1, 1).real();
    job.m_eff = m_eff_estimate(model.omegas, drive.omega_d, drive.lambda_max);

    const CollectiveDecaySolver solver(eliminated_model(model));
    const bool full = static_cast<int>(r) < cfg.timeseries_realizations;
    job.result = solver.run(solver.product_state(qubits), decay_options(model, job.m, cfg, full));
    if (!full) job.result.series = {};
  });

  DrivenResult out;
  std::vector<MeanSeries> series(n_l);
  for (std::size_t li = 0; li < n_l; ++li) {
    DrivenPoint p;
    p.lambda_max = cfg.lambda_values[li];
    std::vector<double> m_eff;
    int recorded = 0;
    for (std::size_t r = 0; r < n_r; ++r) {
      const Job& job = jobs[li * n_r + r];
      p.m_samples.push_back(job.m);
      p.jpjm_samples.push_back(job.result.max_jpjm);
      m_eff.push_back(job.m_eff);
      out.drive_step = std::max(out.drive_step, job.drive_step);
      out.scaling.max_trace_drift = std::max(out.scaling.max_trace_drift, job.result.max_trace_drift);
      out.scaling.max_hermiticity_drift =
          std::max(out.scaling.max_hermiticity_drift, job.result.max_hermiticity_drift);
      out.scaling.step = std::max(out.scaling.step, job.result.step);
      if (static_cast<int>(r) < cfg.timeseries_realizations) {
        accumulate(series[li], job.result.series);
        ++recorded;
      }
    }
    if (recorded > 0) scale(series[li], 1.0 / recorded);
    const auto mm = moments(p.m_samples);
    const auto mj = moments(p.jpjm_samples);
    p.m_mean = mm.mean;
    p.m_std = mm.stddev;
    p.m_eff_mean = ensemble::mean(m_eff);
    p.jpjm_mean = mj.mean;
    p.jpjm_std = mj.stddev;

    ScalingPoint s;
    s.m = p.m_mean;
    s.mean = mj.mean;
    s.stddev = mj.stddev;
    s.std_error = mj.std_error;
    s.samples = p.jpjm_samples;
    out.scaling.points.push_back(std::move(s));
    out.table.push_back(std::move(p));
  }

  std::vector<std::size_t> order(n_l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.scaling.points[a].m < out.scaling.points[b].m; });
  std::vector<ScalingPoint> sorted;
  for (std::size_t i : order) {
    sorted.push_back(out.scaling.points[i]);
    out.scaling.series.push_back(series[i]);
  }
  out.scaling.points = std::move(sorted);
  fill_slopes(out.scaling, cfg);

  if (!cfg.out_dir.empty()) {
    write_lambda_table_csv(cfg.out_dir / "fig7c_lambda_to_m.csv", out);
    write_scaling_csv(cfg.out_dir / "fig7a_scaling_driven.csv", out.scaling);
    if (cfg.timeseries_realizations > 0) {
      const SpinModel reference = make_model(cfg.model, draw_frequencies(cfg.model, cfg.seed, 0));
      for (std::size_t li = 0; li < n_l; ++li) {
        write_series_csv(cfg.out_dir / ("fig7de_timeseries_driven_" + std::to_string(li) + ".csv"), reference,
                         series[li]);
      }
    }
  }
  return out;
}

double m_eff_estimate(const std::vector<double>& omegas, double omega_d, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("m_eff_estimate needs lambda > 0");
  double m = 0.0;
  for (double w : omegas) {
    const double d = w - omega_d;
    m += lambda * lambda / (d * d + lambda * lambda);
  }
  return m;
}

double extrapolate_equivalence(const SpinModel& target, const SpinModel& reference, double m_target,
                               double m_reference) {
  for (double v : {target.g, target.kappa, reference.g, reference.kappa, m_target, m_reference}) {
    if (!(v > 0.0)) throw DomainError("extrapolate_equivalence needs positive parameters");
  }
  return (m_target * target.g * target.g / target.kappa) /
         (m_reference * reference.g * reference.g / reference.kappa);
}

double loglog_slope(const std::vector<ScalingPoint>& points, double lo, double hi) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (p.m >= lo && p.m <= hi) {
      if (!(p.m > 0.0 && p.mean > 0.0)) throw DomainError("log-log slope needs positive values");
      x.push_back(std::log(p.m));
      y.push_back(std::log(p.mean));
    }
  }
  if (x.size() < 2) throw DomainError("log-log slope needs at least two points in the window");
  const double mx = ensemble::mean(x), my = ensemble::mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("log-log slope needs two distinct M values");
  return sxy / sxx;
}

double interpolate_scaling(const std::vector<ScalingPoint>& points, double m) {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const auto& a = points[i];
    const auto& b = points[i + 1];
    if (a.m <= m && m <= b.m) {
      if (b.m == a.m) return a.mean;
      const double t = (m - a.m) / (b.m - a.m);
      return a.mean + t * (b.mean - a.mean);
    }
  }
  throw DomainError("scaling curve does not bracket M = " + csv::format(m));
}

EliminationResult validate_elimination(const EliminationConfig& cfg) {
  cfg.model.validate();
  if (cfg.model.n_qubits > kMaxTavisCummingsQubits) {
    throw ConfigError("validate-elimination supports at most " + std::to_string(kMaxTavisCummingsQubits) +
                      " qubits");
  }
  std::vector<double> omegas = cfg.model.delta_omega > 0.0
                                   ? draw_frequencies(cfg.model, cfg.seed, 0)
                                   : std::vector<double>(static_cast<std::size_t>(cfg.model.n_qubits),
                                                         cfg.model.omega_bar);
  const SpinModel m = make_model(cfg.model, std::move(omegas));
  const int n = m.n_qubits();
  const double frame = m.omega_bar;

  double detuning = std::abs(m.omega_c - frame);
  for (double w : m.omegas) detuning = std::max(detuning, std::abs(w - frame));
  const double tau = sr_time(m, n);
  const double fast = std::max(m.kappa, m.g * std::sqrt(static_cast<double>(n + cfg.photon_cutoff)));

  EvolveOptions o;
  o.t0 = 0.0;
  o.t1 = cfg.window_factor * tau;
  o.samples = cfg.samples;
  o.max_step = StepPolicy{tau, fast, detuning, cfg.step_divisor}.step();

  const StateMatrix excited = basis_state(n, (1u << n) - 1u);

  const TavisCummings tc = h_full_tavis_cummings(m, cfg.photon_cutoff, frame);
  TimeDependentHamiltonian h_full;
  h_full.constant = tc.hamiltonian;
  const std::vector<Collapse> loss{tc.cavity_loss};
  const std::vector<Observable> full_obs{{"jpjm", tc.jpjm}, {"photons", tc.photons}};
  const auto full = evolve(with_cavity_vacuum(excited, cfg.photon_cutoff), h_full, loss, o, full_obs);

  const auto ops = collective_ops(n);
  const CollectiveDecayModel elim = eliminated_model(m);
  TimeDependentHamiltonian h_elim;
  h_elim.constant = elim.hamiltonian(ops);
  const std::vector<Observable> elim_obs{{"jpjm", OperatorMatrix(ops.jp * ops.jm)}};
  const auto reduced = evolve(excited, h_elim, elim.collapse(ops), o, elim_obs);

  EliminationResult out;
  out.times = full.series.times;
  out.full = full.series["jpjm"];
  out.eliminated = reduced.series["jpjm"];
  out.max_trace_drift = std::max(full.max_trace_drift, reduced.max_trace_drift);
  out.step = std::min(full.step, reduced.step);
  for (double p : full.series["photons"]) out.max_photons = std::max(out.max_photons, p);
  const double peak = *std::max_element(out.eliminated.begin(), out.eliminated.end());
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double diff = std::abs(out.full[i] - out.eliminated[i]);
    out.peak_normalized_deviation = std::max(out.peak_normalized_deviation, diff / peak);
    if (out.eliminated[i] > 0.0) {
      out.pointwise_relative_deviation = std::max(out.pointwise_relative_deviation, diff / out.eliminated[i]);
    }
  }
  return out;
}

std::string sigma_label(double sigma) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, sigma);
  return std::string(buf, res.ptr);
}

std::vector<BroadeningRun> run_broadening_suite(const BroadeningConfig& cfg) {
  std::vector<BroadeningRun> runs;
  for (double sigma : cfg.sigmas) {
    ensemble::SamplingConfig sc = cfg.base;
    sc.sigma_s = sc.sigma_l1 = sc.sigma_l2 = sigma;
    BroadeningRun run;
    run.sigma = sigma;
    run.sample = ensemble::build_ensemble(sc, cfg.basis_cutoff, cfg.threads, cfg.fit_tolerance);
    const auto d = ensemble::deltas(run.sample.qubits);
    const auto ip = ensemble::ips(run.sample.qubits);
    run.kde_fwhm = ensemble::kde_fwhm(d, cfg.kde);
    run.pearson = d.size() >= 2 ? ensemble::pearson_correlation(d, ip) : std::numeric_limits<double>::quiet_NaN();
    if (run.sample.qubits.size() >= 2) {
      run.std_at_half = ensemble::ensemble_std(run.sample, circuit::FluxBias{0.5});
      run.optimum = ensemble::optimal_flux(run.sample.qubits, cfg.flux, cfg.flux_grid);
      run.std_scan = ensemble::std_vs_flux(run.sample.qubits, cfg.flux, cfg.flux_grid);
    }

    if (!cfg.out_dir.empty()) {
      const std::string label = sigma_label(sigma);
      {
        csv::Writer w(cfg.out_dir / ("fig3_kde_" + label + ".csv"), {"delta_ghz", "kde_sum", "kde_normalized"});
        const auto [lo_it, hi_it] = std::minmax_element(d.begin(), d.end());
        const double lo = *lo_it - 5.0 * cfg.kde.bandwidth;
        const double hi = *hi_it + 5.0 * cfg.kde.bandwidth;
        for (int i = 0; i < cfg.kde_grid; ++i) {
          const double x = lo + (hi - lo) * i / (cfg.kde_grid - 1);
          w.row(x, ensemble::kde(d, cfg.kde, x), ensemble::kde_normalized(d, cfg.kde, x));
        }
      }
      {
        csv::Writer w(cfg.out_dir / ("fig4_scatter_" + label + ".csv"),
                      {"index", "alpha", "beta1", "beta2", "delta_ghz", "ip_slope_ghz", "ip_amperes"});
        for (std::size_t i = 0; i < run.sample.qubits.size(); ++i) {
          const auto& j = run.sample.junctions[i];
          const auto& q = run.sample.qubits[i];
          w.row(static_cast<unsigned long>(i), j.alpha, j.beta1, j.beta2, q.delta, q.ip, circuit::ip_amperes(q));
        }
      }
      if (!run.std_scan.empty()) {
        csv::Writer w(cfg.out_dir / ("fig5_std_vs_flux_" + label + ".csv"), {"f", "std_ghz"});
        for (const auto& [f, s] : run.std_scan) w.row(f, s);
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& r) {
  csv::Writer w(path, {"m", "max_jpjm_mean", "max_jpjm_std", "max_jpjm_stderr", "realizations"});
  for (const auto& p : r.points) w.row(p.m, p.mean, p.stddev, p.std_error, static_cast<unsigned long>(p.samples.size()));
}

void write_lambda_table_csv(const std::filesystem::path& path, const DrivenResult& r) {
  csv::Writer w(path, {"lambda_max_rad_per_ns", "m_mean", "m_std", "m_eff_estimate", "max_jpjm_mean", "max_jpjm_std"});
  for (const auto& p : r.table) w.row(p.lambda_max, p.m_mean, p.m_std, p.m_eff_mean, p.jpjm_mean, p.jpjm_std);
}

void write_series_csv(const std::filesystem::path& path, const SpinModel& m, const MeanSeries& s) {
  csv::Writer w(path, {"time_ns", "jpjm", "intensity", "excited_count"});
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    w.row(s.times[i], s.jpjm[i], intensity(m, s.jpjm[i]), s.excited_count[i]);
  }
}

}  // namespace fluxsr::experiments
