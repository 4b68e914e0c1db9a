#pragma once

// Three-junction flux qubit: reduced potential, charge-basis Hamiltonian and
// extraction of the two-level parameters (tunneling energy, persistent
// current) from the numerically obtained spectrum.

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fluxsr/common.hpp"

namespace fluxsr::circuit {

// Junction geometry of one fabricated qubit. Areas are normalized to the
// large-junction design area; both the critical current and the capacitance
// of a junction scale with its area.
struct JunctionSet {
  double alpha = 0.7;        // small junction area ratio
  double beta1 = 1.0;        // large junction 1
  double beta2 = 1.0;        // large junction 2
  double ej_over_ec = 75.0;  // E_J / E_c of a unit-area junction
  double ej = 200.0;         // E_J / h of a unit-area junction, GHz

  // Throws DomainError when alpha <= 0.5 or any other field is not > 0.
  void validate() const;
};

// Frustration Phi_ext / Phi_0.
struct FluxBias {
  double f = 0.5;
};

struct Spectrum {
  std::vector<double> eigenvalues;  // GHz, ascending
  int basis_cutoff = 0;
  int dimension = 0;
};

// Two-level description of a qubit. `ip` is the energy slope 2 I_p Phi_0 in
// GHz per unit frustration, so that epsilon = ip * (f - 1/2).
struct QubitParams {
  double delta = 0.0;
  double ip = 0.0;
};

inline constexpr int kDefaultBasisCutoff = 12;

// Flux offsets (from f = 1/2) at which the gap is sampled for the persistent
// current fit. The negative side is filled in by the f -> 1 - f symmetry.
inline constexpr std::array<double, 3> kFitOffsets{0.001, 0.003, 0.005};

// Default bound on the RMS residual of the two-level fit, relative to delta.
inline constexpr double kDefaultFitTolerance = 1e-2;

// U / E_J = 2 + alpha - cos(phi_p + phi_m) - cos(phi_p - phi_m)
//           - alpha cos(2 pi f - 2 phi_m)
double potential(double phi_p, double phi_m, FluxBias f, double alpha);

// Potential of an arbitrary junction set (unequal large junctions), in units
// of the unit-area E_J. Reduces to potential() for beta1 = beta2 = 1.
double junction_potential(const JunctionSet& j, double phi_p, double phi_m, FluxBias f);

// +-phi_m* with cos(phi_m*) = 1 / (2 alpha). Requires alpha > 0.5.
std::pair<double, double> potential_minima(double alpha);

// E_t / E_J = -2 + 2 alpha + 1 / (2 alpha). Requires alpha > 0.5.
double barrier_height(double alpha);

// (dU/df) / E_J at the well, 2 pi sqrt(1 - 1 / (2 alpha)^2). Requires alpha > 0.5.
double potential_gradient(double alpha);

// Number of plane waves for a given cutoff, (2 cutoff + 1)^2.
int basis_dimension(int basis_cutoff);

// Hamiltonian in GHz on the island-charge basis |n1, n2>, |n1|, |n2| <= cutoff.
// In (phi_p, phi_m) these are the plane waves exp(i (k phi_p + l phi_m)) with
// k = n1 + n2, l = n1 - n2. Exactly Hermitian: every off-diagonal element is
// written together with its conjugate.
Eigen::MatrixXcd charge_basis_hamiltonian(const JunctionSet& j, FluxBias f, int basis_cutoff);

// Real symmetric form of a charge-basis Hamiltonian. The Hamiltonian commutes
// with complex conjugation combined with n -> -n, so it is real in the basis
// (|n> + |-n>)/sqrt2, i(|n> - |-n>)/sqrt2. `imag_residue` is the largest
// imaginary part discarded by the transform.
struct RealForm {
  Eigen::MatrixXd matrix;
  double imag_residue = 0.0;
};
RealForm real_symmetric_form(const Eigen::MatrixXcd& h);

// Lowest `n_levels` eigenvalues (GHz, ascending) of the charge-basis
// Hamiltonian. basis_cutoff >= 5.
Spectrum diagonalize(const JunctionSet& j, FluxBias f, int basis_cutoff = kDefaultBasisCutoff,
                     int n_levels = 2);

// E1 - E0.
double qubit_gap(const JunctionSet& j, FluxBias f, int basis_cutoff = kDefaultBasisCutoff);

struct TwoLevelFit {
  QubitParams params;
  double rms_residual = 0.0;   // GHz
  std::vector<double> offsets;  // f - 1/2, ascending, symmetric
  std::vector<double> gaps;     // GHz
};

// Delta = gap at f = 1/2; ip from a least-squares fit of
// sqrt((ip (f - 1/2))^2 + delta^2) to the gap on the symmetric offset grid.
TwoLevelFit fit_two_level(const JunctionSet& j, int basis_cutoff = kDefaultBasisCutoff);

// fit_two_level, rejecting fits whose RMS residual exceeds
// `fit_tolerance * delta` with a NumericalError.
QubitParams extract_qubit_params(const JunctionSet& j, int basis_cutoff = kDefaultBasisCutoff,
                                 double fit_tolerance = kDefaultFitTolerance);

// Persistent current in amperes from the stored slope 2 I_p Phi_0 (GHz).
double ip_amperes(const QubitParams& q);

}  // namespace fluxsr::circuit
