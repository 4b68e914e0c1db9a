#include <cmath>

#include <doctest.h>

#include "fluxsr/circuit.hpp"

using namespace fluxsr;
using namespace fluxsr::circuit;

namespace {

JunctionSet reference_junctions() { return JunctionSet{}; }

}  // namespace

TEST_CASE("potential at the origin and at the well") {
  CHECK(potential(0.0, 0.0, FluxBias{0.5}, 0.7) == doctest::Approx(1.4).epsilon(1e-14));
  const double phi = std::acos(1.0 / 1.4);
  CHECK(potential(0.0, phi, FluxBias{0.5}, 0.7) == doctest::Approx(2.7 - 2.0 / 1.4 + 0.7 * (2.0 / 1.96 - 1.0)).epsilon(1e-14));
  CHECK(potential(0.0, phi, FluxBias{0.5}, 0.7) == doctest::Approx(1.2857).epsilon(1e-4));
}

TEST_CASE("potential is 2 pi periodic and symmetric at half frustration") {
  for (double f : {0.3, 0.5, 0.52}) {
    for (int i = -6; i <= 6; ++i) {
      for (int k = -6; k <= 6; ++k) {
        const double p = 0.37 * i, m = 0.41 * k;
        const double u = potential(p, m, FluxBias{f}, 0.7);
        CHECK(potential(p + kTwoPi, m, FluxBias{f}, 0.7) == doctest::Approx(u).epsilon(1e-12));
        CHECK(potential(p, m + kTwoPi, FluxBias{f}, 0.7) == doctest::Approx(u).epsilon(1e-12));
        if (f == 0.5) {
          CHECK(potential(p, -m, FluxBias{f}, 0.7) == doctest::Approx(u).epsilon(1e-12));
          CHECK(potential(-p, m, FluxBias{f}, 0.7) == doctest::Approx(u).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("junction_potential reduces to potential for equal large junctions") {
  JunctionSet j;
  j.alpha = 0.73;
  for (double p : {-1.0, 0.2, 2.5}) {
    for (double m : {-0.7, 0.0, 1.1}) {
      CHECK(junction_potential(j, p, m, FluxBias{0.49}) == doctest::Approx(potential(p, m, FluxBias{0.49}, 0.73)).epsilon(1e-14));
    }
  }
}

TEST_CASE("potential minima") {
  const auto [lo, hi] = potential_minima(0.7);
  CHECK(hi == doctest::Approx(0.77519).epsilon(1e-5));
  CHECK(lo == doctest::Approx(-hi));
  CHECK(potential_minima(1.0).second == doctest::Approx(kPi / 3).epsilon(1e-14));
  CHECK(std::abs(potential_minima(0.5 + 1e-12).second) < 1e-5);
  CHECK_THROWS_AS(potential_minima(0.5), DomainError);
  CHECK_THROWS_AS(potential_minima(0.3), DomainError);
}

TEST_CASE("barrier height") {
  CHECK(barrier_height(0.7) == doctest::Approx(0.114286).epsilon(1e-5));
  CHECK(barrier_height(0.8) == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(std::abs(barrier_height(0.5 + 1e-9)) < 1e-8);
  CHECK_THROWS_AS(barrier_height(0.5), DomainError);
}

TEST_CASE("flux gradient at the well") {
  CHECK(potential_gradient(0.7) == doctest::Approx(4.3977).epsilon(1e-4));
  CHECK(potential_gradient(1.0) == doctest::Approx(5.4414).epsilon(1e-4));
  CHECK(potential_gradient(0.5 + 1e-12) < 1e-4);
}

TEST_CASE("barrier and gradient agree with the potential itself") {
  for (double a : {0.6, 0.7, 0.8, 0.95}) {
    const double phi = potential_minima(a).second;
    // saddle at the origin minus the well
    const double barrier = potential(0.0, 0.0, FluxBias{0.5}, a) - potential(0.0, phi, FluxBias{0.5}, a);
    CHECK(barrier == doctest::Approx(barrier_height(a)).epsilon(1e-6));
    const double h = 1e-5;
    const double fd = (potential(0.0, phi, FluxBias{0.5 + h}, a) - potential(0.0, phi, FluxBias{0.5 - h}, a)) / (2 * h);
    CHECK(fd == doctest::Approx(potential_gradient(a)).epsilon(1e-6));
    // the well is stationary in phi_m
    const double dm = (potential(0.0, phi + h, FluxBias{0.5}, a) - potential(0.0, phi - h, FluxBias{0.5}, a)) / (2 * h);
    CHECK(std::abs(dm) < 1e-8);
  }
}

TEST_CASE("basis dimension") {
  CHECK(basis_dimension(12) == 625);
  CHECK(basis_dimension(5) == 121);
}

TEST_CASE("charge basis Hamiltonian is exactly Hermitian") {
  JunctionSet j;
  j.alpha = 0.68;
  j.beta1 = 1.02;
  j.beta2 = 0.97;
  const Eigen::MatrixXcd h = charge_basis_hamiltonian(j, FluxBias{0.503}, 6);
  CHECK(h.rows() == basis_dimension(6));
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  const RealForm r = real_symmetric_form(h);
  CHECK(r.imag_residue < 1e-10 * h.cwiseAbs().maxCoeff());
  CHECK((r.matrix - r.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12 * r.matrix.cwiseAbs().maxCoeff());
}

TEST_CASE("real form has the same spectrum as the complex Hamiltonian") {
  const Eigen::MatrixXcd h = charge_basis_hamiltonian(reference_junctions(), FluxBias{0.51}, 5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> complex_solver(h, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> real_solver(real_symmetric_form(h).matrix, Eigen::EigenvaluesOnly);
  const double scale = complex_solver.eigenvalues().cwiseAbs().maxCoeff();
  CHECK((complex_solver.eigenvalues() - real_solver.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11 * scale);
  const Spectrum s = diagonalize(reference_junctions(), FluxBias{0.51}, 5, 4);
  REQUIRE(s.eigenvalues.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(s.eigenvalues[i] == doctest::Approx(complex_solver.eigenvalues()[i]).epsilon(1e-11));
}

TEST_CASE("gap converges with the basis cutoff") {
  const double g10 = qubit_gap(reference_junctions(), FluxBias{0.5}, 10);
  const double g14 = qubit_gap(reference_junctions(), FluxBias{0.5}, 14);
  CHECK(std::abs(g10 - g14) / g14 < 1e-6);
}

TEST_CASE("gap is symmetric under f -> 1 - f") {
  const double up = qubit_gap(reference_junctions(), FluxBias{0.503});
  const double down = qubit_gap(reference_junctions(), FluxBias{0.497});
  CHECK(std::abs(up - down) / up < 1e-9);
}

TEST_CASE("diagonalize rejects bad input") {
  JunctionSet j;
  j.alpha = 0.5;
  CHECK_THROWS_AS(diagonalize(j, FluxBias{0.5}), DomainError);
  CHECK_THROWS_AS(diagonalize(reference_junctions(), FluxBias{0.5}, 4), DomainError);
  j = reference_junctions();
  j.ej = -1.0;
  CHECK_THROWS_AS(diagonalize(j, FluxBias{0.5}), DomainError);
}

TEST_CASE("extracted delta is the gap at half frustration") {
  const QubitParams q = extract_qubit_params(reference_junctions());
  CHECK(q.delta == qubit_gap(reference_junctions(), FluxBias{0.5}));
  CHECK(q.delta > 0.5);
  CHECK(q.delta < 10.0);
  CHECK(q.ip > 0.0);
}

TEST_CASE("extraction is bit-identical on repeat") {
  JunctionSet j;
  j.alpha = 0.71;
  j.beta1 = 1.01;
  const QubitParams a = extract_qubit_params(j);
  const QubitParams b = extract_qubit_params(j);
  CHECK(a.delta == b.delta);
  CHECK(a.ip == b.ip);
}

TEST_CASE("larger alpha lowers delta and raises ip") {
  JunctionSet lo, hi;
  lo.alpha = 0.65;
  hi.alpha = 0.75;
  const QubitParams a = extract_qubit_params(lo);
  const QubitParams b = extract_qubit_params(hi);
  CHECK(b.delta < a.delta);
  CHECK(b.ip > a.ip);
}

TEST_CASE("two-level fit uses a symmetric grid and tracks the gap") {
  const TwoLevelFit fit = fit_two_level(reference_junctions());
  REQUIRE(fit.offsets.size() == fit.gaps.size());
  REQUIRE(fit.offsets.size() == 2 * kFitOffsets.size() + 1);
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    CHECK(fit.offsets[i] == doctest::Approx(-fit.offsets[fit.offsets.size() - 1 - i]));
    const double model = std::hypot(fit.params.ip * fit.offsets[i], fit.params.delta);
    CHECK(std::abs(model - fit.gaps[i]) < 5e-3 * fit.params.delta);
  }
  CHECK(fit.rms_residual < 2e-3 * fit.params.delta);
}

// The two-level form is only approximate over |f - 1/2| <= 0.005: the residual
// at the reference junctions is about 1.2e-3 delta, just above this bound.
TEST_CASE("two-level fit residual below 1e-3 delta" * doctest::should_fail()) {
  const TwoLevelFit fit = fit_two_level(reference_junctions());
  CHECK(fit.rms_residual < 1e-3 * fit.params.delta);
}

TEST_CASE("fit tolerance is enforced") {
  CHECK_THROWS_AS(extract_qubit_params(reference_junctions(), kDefaultBasisCutoff, 1e-6), NumericalError);
  CHECK_NOTHROW(extract_qubit_params(reference_junctions(), kDefaultBasisCutoff, kDefaultFitTolerance));
}

TEST_CASE("persistent current in amperes") {
  QubitParams q;
  q.ip = 1000.0;  // GHz per unit frustration
  // 2 I_p Phi_0 = h * 1e12 Hz
  CHECK(ip_amperes(q) == doctest::Approx(units::kPlanck * 1e12 / (2.0 * units::kFluxQuantum)).epsilon(1e-14));
}
