#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "fluxsr/collective_decay.hpp"
#include "fluxsr/lindblad.hpp"

using namespace fluxsr;
using namespace fluxsr::dynamics;

namespace {

CollectiveDecayModel sample_model(int n) {
  CollectiveDecayModel m;
  for (int j = 0; j < n; ++j) m.energies.push_back(0.05 * (j - 1.3) * (j % 2 ? 1.0 : -1.0));
  m.jpjm_coefficient = 0.07;
  m.rate = 0.11;
  return m;
}

Qubit2 qubit_state(double theta, double phase) {
  Eigen::Vector2cd psi(std::cos(theta / 2), std::polar(std::sin(theta / 2), phase));
  return psi * psi.adjoint();
}

StateMatrix dense_product(std::span<const Qubit2> q) {
  // bit j is qubit j, so qubit 0 is the fastest index
  StateMatrix rho = StateMatrix::Ones(1, 1);
  for (const Qubit2& s : q) {
    StateMatrix next(rho.rows() * 2, rho.cols() * 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) next.block(a * rho.rows(), b * rho.cols(), rho.rows(), rho.cols()) = s(a, b) * rho;
    rho = next;
  }
  return rho;
}

StateMatrix block_diagonal_part(const StateMatrix& rho) {
  StateMatrix out = StateMatrix::Zero(rho.rows(), rho.cols());
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (std::popcount(static_cast<unsigned>(i)) == std::popcount(static_cast<unsigned>(j))) out(i, j) = rho(i, j);
  return out;
}

}  // namespace

TEST_CASE("block layout") {
  const CollectiveDecaySolver s(sample_model(4));
  CHECK(s.n_qubits() == 4);
  CHECK(s.state_size() == 1 + 16 + 36 + 16 + 1);
  const auto b2 = s.block_states(2);
  REQUIRE(b2.size() == 6);
  for (std::size_t i = 0; i < b2.size(); ++i) {
    CHECK(std::popcount(b2[i]) == 2);
    if (i) CHECK(b2[i] > b2[i - 1]);
  }
}

TEST_CASE("size guard and model checks") {
  CHECK_THROWS_AS(CollectiveDecaySolver(sample_model(kMaxBlockQubits + 1)), DomainError);
  CollectiveDecayModel bad = sample_model(2);
  bad.rate = -1.0;
  CHECK_THROWS_AS(CollectiveDecaySolver{bad}, DomainError);
}

TEST_CASE("dense round trip keeps the excitation-number blocks") {
  const CollectiveDecaySolver s(sample_model(3));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  StateMatrix a(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) a(i, j) = cd(nd(rng), nd(rng));
  StateMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  const StateMatrix back = s.to_dense(s.from_dense(rho));
  CHECK((back - block_diagonal_part(rho)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(s.trace(s.from_dense(rho)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("product state and observables against dense expectations") {
  const int n = 4;
  const CollectiveDecaySolver s(sample_model(n));
  const std::vector<Qubit2> q{qubit_state(0.3, 0.1), qubit_state(2.0, -1.0), qubit_state(kPi, 0.0), qubit_state(1.1, 2.5)};
  const StateMatrix dense = dense_product(q);
  const BlockState b = s.product_state(q);
  CHECK((s.to_dense(b) - block_diagonal_part(dense)).cwiseAbs().maxCoeff() < 1e-15);
  const CollectiveOps ops = collective_ops(n);
  CHECK(s.jpjm(b) == doctest::Approx(expectation(OperatorMatrix(ops.jp * ops.jm), dense).real()).epsilon(1e-13));
  OperatorMatrix count = 0.5 * (ops.jz + 4.0 * identity(16));
  CHECK(s.excited_count(b) == doctest::Approx(expectation(count, dense).real()).epsilon(1e-13));
  double total = 0.0;
  for (double p : s.populations(b)) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.hermiticity_error(b) < 1e-15);
}

TEST_CASE("basis states") {
  const CollectiveDecaySolver s(sample_model(3));
  const BlockState b = s.basis_state(0b101);
  CHECK(s.jpjm(b) == doctest::Approx(2.0));
  CHECK(s.excited_count(b) == doctest::Approx(2.0));
  CHECK(s.trace(s.zero_state()) == 0.0);
}

TEST_CASE("block right-hand side matches the dense Lindblad generator") {
  const int n = 4;
  const CollectiveDecayModel model = sample_model(n);
  const CollectiveDecaySolver s(model);
  const CollectiveOps ops = collective_ops(n);
  const std::vector<Qubit2> q{qubit_state(0.7, 0.2), qubit_state(2.2, 1.0), qubit_state(1.4, -0.4), qubit_state(2.9, 0.0)};
  const StateMatrix rho = block_diagonal_part(dense_product(q));
  BlockState out;
  s.rhs(s.from_dense(rho), out);
  const StateMatrix dense = lindblad_rhs(rho, model.hamiltonian(ops), model.collapse(ops));
  CHECK((s.to_dense(out) - dense).cwiseAbs().maxCoeff() < 1e-13);
  // coherences between different excitation numbers are never created
  CHECK((dense - block_diagonal_part(dense)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("block integration matches the dense integrator") {
  const int n = 3;
  const CollectiveDecayModel model = sample_model(n);
  const CollectiveDecaySolver s(model);
  const CollectiveOps ops = collective_ops(n);
  const std::vector<Qubit2> q{qubit_state(2.5, 0.3), qubit_state(kPi, 0.0), qubit_state(1.2, -2.0)};

  DecayOptions d;
  d.t1 = 40.0;
  d.samples = 401;
  d.max_step = 0.02;
  const DecayResult br = s.run(s.product_state(q), d);

  TimeDependentHamiltonian h;
  h.constant = model.hamiltonian(ops);
  EvolveOptions e;
  e.t0 = 0.0;
  e.t1 = d.t1;
  e.samples = d.samples;
  e.max_step = d.max_step;
  const std::vector<Observable> obs{{"jpjm", OperatorMatrix(ops.jp * ops.jm)}};
  const EvolveResult dr = evolve(dense_product(q), h, model.collapse(ops), e, obs);

  REQUIRE(br.series.times.size() == dr.series.times.size());
  for (std::size_t i = 0; i < br.series.times.size(); ++i) {
    CHECK(br.series.times[i] == doctest::Approx(dr.series.times[i]).epsilon(1e-14));
    CHECK(std::abs(br.series["jpjm"][i] - dr.series["jpjm"][i]) < 1e-12);
  }
  CHECK(br.step == doctest::Approx(dr.step));
  CHECK(br.max_trace_drift < 1e-10);
  CHECK((s.to_dense(br.final_state) - block_diagonal_part(dr.final_state)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("early exit returns the same maximum as the full window") {
  CollectiveDecayModel model;
  model.energies = {0.01, -0.02, 0.015, 0.0, -0.005, 0.03};
  model.rate = 0.05;
  const CollectiveDecaySolver s(model);
  DecayOptions d;
  d.t1 = 60.0;
  d.samples = 2001;
  d.max_step = 0.01;
  const BlockState init = s.basis_state(0b111111);
  const DecayResult full = s.run(init, d);
  d.stop_when_max_resolved = true;
  const DecayResult early = s.run(init, d);
  CHECK_FALSE(full.stopped_early);
  CHECK(early.stopped_early);
  CHECK(early.series.times.back() < full.series.times.back());
  CHECK(early.max_jpjm == full.max_jpjm);
  CHECK(early.t_max == full.t_max);
  // superradiant burst: the maximum is not at t = 0
  CHECK(full.t_max > 0.0);
  CHECK(full.max_jpjm > 6.0);
}

TEST_CASE("single excitation decays monotonically") {
  CollectiveDecayModel model;
  model.energies = {0.0};
  model.rate = 0.2;
  const CollectiveDecaySolver s(model);
  DecayOptions d;
  d.t1 = 10.0;
  d.samples = 101;
  d.max_step = 0.01;
  const DecayResult r = s.run(s.basis_state(1), d);
  CHECK(r.max_jpjm == 1.0);
  CHECK(r.t_max == 0.0);
  for (std::size_t i = 0; i < r.series.times.size(); ++i) {
    CHECK(std::abs(r.series["jpjm"][i] - std::exp(-0.4 * r.series.times[i])) < 1e-9);
  }
}

TEST_CASE("steps spanning several samples interpolate the observables") {
  const int n = 4;
  const CollectiveDecaySolver s(sample_model(n));
  const std::vector<Qubit2> q{qubit_state(2.5, 0.3), qubit_state(kPi, 0.0), qubit_state(1.2, -2.0), qubit_state(2.0, 1.0)};
  DecayOptions d;
  d.t1 = 20.0;
  d.samples = 401;  // interval 0.05
  d.max_step = 0.005;
  const DecayResult fine = s.run(s.product_state(q), d);
  d.max_step = 0.2;  // four intervals per step
  const DecayResult coarse = s.run(s.product_state(q), d);
  CHECK(coarse.step == doctest::Approx(0.2).epsilon(1e-12));
  REQUIRE(coarse.series.times.size() == fine.series.times.size());
  for (std::size_t i = 0; i < fine.series.times.size(); ++i) {
    CHECK(coarse.series.times[i] == fine.series.times[i]);
    CHECK(std::abs(coarse.series["jpjm"][i] - fine.series["jpjm"][i]) < 1e-5);
    CHECK(std::abs(coarse.series["excited_count"][i] - fine.series["excited_count"][i]) < 1e-5);
  }
  // a window that is not a whole number of steps ends with a shorter one
  d.samples = 403;
  const DecayResult ragged = s.run(s.product_state(q), d);
  CHECK(ragged.series.times.size() == 403);
  CHECK(ragged.series.times.back() == d.t1);
  CHECK(coarse.max_trace_drift < 1e-12);
  CHECK(coarse.steps == 100);
}
