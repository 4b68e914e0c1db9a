#include <cmath>
#include <filesystem>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>
#include <doctest.h>

#include "fluxsr/experiments.hpp"
#include "fluxsr/lindblad.hpp"

using namespace fluxsr;
using namespace fluxsr::experiments;
namespace fs = std::filesystem;

namespace {

double mhz(double v) { return units::mhz_to_rad_per_ns(v); }

SpinTemplate fig7_template(int n, double delta_omega_mhz = 25.0) {
  SpinTemplate t;
  t.n_qubits = n;
  t.omega_bar = mhz(5000.0);
  t.omega_c = t.omega_bar;
  t.delta_omega = mhz(delta_omega_mhz);
  t.g = mhz(50.0);
  t.kappa = mhz(400.0);
  return t;
}

SweepConfig sweep(int n, double delta_omega_mhz, std::vector<int> m_values, int realizations) {
  SweepConfig c;
  c.model = fig7_template(n, delta_omega_mhz);
  c.m_values = std::move(m_values);
  c.realizations = realizations;
  c.threads = 1;
  return c;
}

// Symmetric Dicke ladder: from k excitations the collective dissipator moves
// population to k - 1 at rate 2 gamma k (N - k + 1). The rate matrix is
// defective (k (N - k + 1) repeats), so use the matrix exponential.
std::vector<double> dicke_jpjm(int n, double gamma, const std::vector<double>& times) {
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n + 1, n + 1);
  auto c = [n](int k) { return static_cast<double>(k) * (n - k + 1); };
  for (int k = 1; k <= n; ++k) {
    rates(k, k) -= 2.0 * gamma * c(k);
    rates(k - 1, k) += 2.0 * gamma * c(k);
  }
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n + 1);
  p0(n) = 1.0;
  std::vector<double> out;
  for (double t : times) {
    const Eigen::VectorXd p = (rates * t).exp() * p0;
    double j = 0.0;
    for (int k = 0; k <= n; ++k) j += p(k) * c(k);
    out.push_back(j);
  }
  return out;
}

}  // namespace

TEST_CASE("frequency draws are keyed and have the configured moments") {
  const SpinTemplate t = fig7_template(10);
  CHECK(draw_frequencies(t, 7, 3) == draw_frequencies(t, 7, 3));
  CHECK(draw_frequencies(t, 7, 3) != draw_frequencies(t, 7, 4));
  CHECK(draw_frequencies(t, 7, 3) != draw_frequencies(t, 8, 3));
  std::vector<double> all;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto w = draw_frequencies(t, 1, r);
    all.insert(all.end(), w.begin(), w.end());
  }
  CHECK(ensemble::mean(all) == doctest::Approx(t.omega_bar).epsilon(1e-5));
  CHECK(ensemble::stddev(all) == doctest::Approx(t.delta_omega).epsilon(0.02));
  const SpinTemplate flat = fig7_template(4, 0.0);
  for (double w : draw_frequencies(flat, 1, 0)) CHECK(w == flat.omega_bar);
}

TEST_CASE("sweep configuration validation") {
  SweepConfig c = sweep(4, 25.0, {1, 2}, 2);
  CHECK_NOTHROW(c.validate());
  c.realizations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sweep(4, 25.0, {1, 5}, 2);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sweep(4, 25.0, {1, 2}, 2);
  c.lambda_values = {-1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = sweep(4, 25.0, {1, 2}, 2);
  c.model.g = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("one excited qubit cannot superradiate") {
  const ScalingResult r = run_discrete_m(sweep(10, 25.0, {1}, 3));
  REQUIRE(r.points.size() == 1);
  for (double s : r.points[0].samples) CHECK(s == 1.0);
  CHECK(r.points[0].stddev == 0.0);
}

TEST_CASE("two excited qubits out of two") {
  SweepConfig c = sweep(2, 0.0, {2}, 1);
  const ScalingResult r = run_discrete_m(c);
  CHECK(r.points[0].mean >= 2.0 - 1e-12);
  REQUIRE(r.series.size() == 1);
  CHECK(r.series[0].jpjm.front() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("homogeneous decay of a fully excited ensemble matches the Dicke ladder") {
  for (int n = 1; n <= 4; ++n) {
    SweepConfig c = sweep(n, 0.0, {n}, 1);
    c.decay_step_divisor = 200.0;
    const ScalingResult r = run_discrete_m(c);
    const SpinModel m = make_model(c.model, draw_frequencies(c.model, c.seed, 0));
    const auto& ts = r.series[0].times;
    const auto oracle = dicke_jpjm(n, dynamics::superradiant_rate(m), ts);
    double worst = 0.0, oracle_max = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      worst = std::max(worst, std::abs(oracle[i] - r.series[0].jpjm[i]));
      oracle_max = std::max(oracle_max, oracle[i]);
    }
    CHECK(worst < 1e-6);
    CHECK(r.points[0].mean == doctest::Approx(oracle_max).epsilon(1e-6));
  }
}

TEST_CASE("sweeps are a pure function of the configuration") {
  SweepConfig c = sweep(5, 25.0, {2, 5}, 4);
  const ScalingResult a = run_discrete_m(c);
  c.threads = 3;
  const ScalingResult b = run_discrete_m(c);
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].samples == b.points[i].samples);
  c.seed = 9;
  const ScalingResult other = run_discrete_m(c);
  CHECK(other.points[1].samples != a.points[1].samples);
}

TEST_CASE("standard error shrinks with the realization count") {
  const ScalingResult small = run_discrete_m(sweep(4, 25.0, {4}, 25));
  const ScalingResult large = run_discrete_m(sweep(4, 25.0, {4}, 100));
  const double ratio = small.points[0].std_error / large.points[0].std_error;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.9);
}

TEST_CASE("default decay step divisor agrees with 200") {
  SweepConfig c = sweep(10, 25.0, {10}, 1);
  c.timeseries_realizations = 0;
  const ScalingResult coarse = run_discrete_m(c);
  c.decay_step_divisor = 200.0;
  const ScalingResult fine = run_discrete_m(c);
  CHECK(coarse.step > 5.0 * fine.step);
  CHECK(std::abs(coarse.points[0].mean - fine.points[0].mean) < 1e-4 * fine.points[0].mean);
}

TEST_CASE("decay options") {
  const SweepConfig c = sweep(10, 25.0, {1}, 1);
  const SpinModel m = make_model(c.model, draw_frequencies(c.model, 1, 0));
  const auto full = decay_options(m, 10, c, true);
  CHECK(full.t1 == doctest::Approx(10.0 * dynamics::sr_time(m, 1.0)));
  CHECK(full.samples == 2001);
  CHECK_FALSE(full.stop_when_max_resolved);
  CHECK(full.max_step <= dynamics::sr_time(m, 10.0) / 10.0);
  CHECK(decay_options(m, 10, c, false).stop_when_max_resolved);
}

TEST_CASE("per-qubit drive matches the dense drive evolution") {
  const SpinTemplate t = fig7_template(3);
  const SpinModel m = make_model(t, draw_frequencies(t, 4, 0));
  const dynamics::DriveSpec d{mhz(40.0), t.omega_bar};
  double step = 0.0;
  const auto qubits = drive_qubits(m, d, 200.0, &step);
  REQUIRE(qubits.size() == 3);

  const auto ops = dynamics::collective_ops(3);
  dynamics::EvolveOptions o;
  o.t0 = 0.0;
  o.t1 = d.window();
  o.samples = 201;
  o.max_step = step;
  const auto r = dynamics::evolve(dynamics::basis_state(3, 0), dynamics::drive_generator(m, d, ops), {}, o, {});
  double m_count = 0.0;
  for (const auto& q : qubits) {
    CHECK(std::abs(q.trace() - 1.0) < 1e-12);
    m_count += q(1, 1).real();
  }
  CHECK(std::abs(dynamics::excited_count(r.final_state) - m_count) < 1e-9);
  CHECK(std::abs(dynamics::expectation(ops.sz[1], r.final_state).real() - (2.0 * qubits[1](1, 1).real() - 1.0)) < 1e-9);
}

TEST_CASE("strong drive inverts the ensemble, weak drive does not") {
  SweepConfig c = sweep(4, 25.0, {}, 3);
  c.lambda_values = {mhz(0.5), mhz(2500.0)};
  c.timeseries_realizations = 0;
  const DrivenResult r = run_driven(c);
  REQUIRE(r.table.size() == 2);
  CHECK(r.table[0].m_mean < 0.05);
  CHECK(r.table[1].m_mean >= 0.95 * 4);
  CHECK(r.table[1].m_eff_mean > 3.99);
  CHECK(r.scaling.points.size() == 2);
  CHECK(r.scaling.points[0].m < r.scaling.points[1].m);
}

TEST_CASE("effective excited number estimate") {
  const std::vector<double> w{1.0, 1.0, 1.0};
  CHECK(m_eff_estimate(w, 1.0, 0.3) == doctest::Approx(3.0));
  // lambda equal to every |detuning| gives half the qubits
  const std::vector<double> same{1.0, 5.0};
  CHECK(m_eff_estimate(same, 3.0, 2.0) == doctest::Approx(1.0));
  const std::vector<double> v{1.0, 3.0, 5.0, 7.0};
  CHECK(m_eff_estimate(v, 4.0, 1e-9) < 1e-15);
}

TEST_CASE("extrapolation identity") {
  SpinModel target, reference;
  target.omegas.assign(1, 0.0);
  reference.omegas.assign(1, 0.0);
  target.g = mhz(5.0);
  target.kappa = mhz(1720.0);
  reference.g = mhz(50.0);
  reference.kappa = mhz(400.0);
  CHECK(extrapolate_equivalence(target, reference, 4300, 10) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(extrapolate_equivalence(reference, reference, 10, 10) == 1.0);
  SpinModel doubled = reference;
  doubled.g *= 2.0;
  CHECK(extrapolate_equivalence(doubled, reference, 10, 10) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("log-log slope and interpolation") {
  std::vector<ScalingPoint> pts;
  for (int m = 1; m <= 10; ++m) {
    ScalingPoint p;
    p.m = m;
    p.mean = m <= 3 ? 2.0 * m : 0.2 * m * m;
    pts.push_back(p);
  }
  CHECK(loglog_slope(pts, 1, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loglog_slope(pts, 5, 10) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS(loglog_slope(pts, 4, 4));
  CHECK(interpolate_scaling(pts, 5.5) == doctest::Approx(0.5 * (0.2 * 25 + 0.2 * 36)).epsilon(1e-14));
  CHECK(interpolate_scaling(pts, 7.0) == doctest::Approx(0.2 * 49).epsilon(1e-14));
  CHECK_THROWS(interpolate_scaling(pts, 10.5));
}

TEST_CASE("eliminated model tracks the cavity model up to the superradiant time") {
  EliminationConfig c;
  c.model = fig7_template(2, 0.0);
  c.window_factor = 1.0;
  c.samples = 201;
  c.step_divisor = 40.0;
  const EliminationResult r = validate_elimination(c);
  REQUIRE(r.times.size() == 201);
  CHECK(std::abs(r.full.back() - r.eliminated.back()) < 0.05 * r.eliminated.back());
  CHECK(r.peak_normalized_deviation < 0.05);
  CHECK(r.max_photons < 0.1);
  CHECK(r.max_trace_drift < 1e-8);
  EliminationConfig big = c;
  big.model.n_qubits = 5;
  CHECK_THROWS_AS(validate_elimination(big), ConfigError);
}

TEST_CASE("broadening suite without spread") {
  const fs::path dir = fs::temp_directory_path() / "fluxsr_test_broadening";
  fs::remove_all(dir);
  BroadeningConfig c;
  c.base.n_qubits = 4;
  c.sigmas = {0.0};
  c.basis_cutoff = 8;
  c.flux_grid = 11;
  c.kde_grid = 51;
  c.threads = 1;
  c.out_dir = dir;
  const auto runs = run_broadening_suite(c);
  REQUIRE(runs.size() == 1);
  const auto& r = runs[0];
  CHECK(r.std_at_half == 0.0);
  CHECK(r.optimum.std_ghz == 0.0);
  for (const auto& q : r.sample.qubits) CHECK(q.delta == r.sample.qubits[0].delta);
  CHECK(r.kde_fwhm == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 0.1).epsilon(2e-3));
  CHECK(fs::exists(dir / "fig3_kde_0.csv"));
  CHECK(fs::exists(dir / "fig4_scatter_0.csv"));
  CHECK(fs::exists(dir / "fig5_std_vs_flux_0.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sigma labels") {
  CHECK(sigma_label(0.01) == "0.01");
  CHECK(sigma_label(0.005) == "0.005");
  CHECK(sigma_label(0.02) == "0.02");
}
