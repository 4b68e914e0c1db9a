#pragma once

// Spin-ensemble models coupled to a lossy cavity: the adiabatically eliminated
// (bad-cavity) model, the dispersive model, the full Tavis-Cummings model used
// to validate the elimination, and the collective drive.
//
// Every frequency and rate here is angular, in rad/ns; times are in ns.

#include <vector>

#include "fluxsr/lindblad.hpp"
#include "fluxsr/operators.hpp"

namespace fluxsr::dynamics {

struct SpinModel {
  std::vector<double> omegas;  // qubit frequencies
  double omega_bar = 0.0;      // configured mean of omegas
  double delta_omega = 0.0;    // configured std of omegas
  double omega_c = 0.0;        // cavity
  double g = 0.0;              // single-qubit coupling
  double kappa = 0.0;          // cavity loss

  int n_qubits() const { return static_cast<int>(omegas.size()); }
  // omega_c - omega_bar.
  double chi() const { return omega_c - omega_bar; }
  // Throws DomainError unless N >= 1, g > 0, kappa > 0, delta_omega >= 0 and
  // every frequency is finite.
  void validate() const;
  // kappa >= 10 delta_omega and kappa >= 10 g^2 N / kappa. Informational only.
  bool bad_cavity() const;
};

// Gaussian drive lambda(t) = lambda_max exp(-((t - b) / sigma)^2) with
// sigma = sqrt(pi) / lambda_max, so the pulse area is pi, and
// b = 4 sigma sqrt(2 ln 2).
struct DriveSpec {
  double lambda_max = 0.0;
  double omega_d = 0.0;

  void validate() const;  // lambda_max > 0 and finite
  double sigma() const;
  double b() const;
  double envelope(double t) const;
  // End of the drive phase, 2 b.
  double window() const { return 2.0 * b(); }
};

// Re[chi g^2 / Gamma^2], Gamma = kappa + i chi: the J+J- coefficient of H_AE.
double jpjm_coefficient(const SpinModel& m);

// kappa g^2 / |Gamma|^2, the rate of the collective dissipator D[J-].
double superradiant_rate(const SpinModel& m);

// H_AE = sum_j (omega_j - omega_bar)/2 sigma_z^(j) + jpjm_coefficient J+J-.
OperatorMatrix h_ae(const SpinModel& m, const CollectiveOps& ops);
OperatorMatrix h_ae(const SpinModel& m);

// sum_j Delta'_j/2 sigma_z^(j) + lambda(t)/2 sum_j sigma_x^(j), Delta'_j = omega_j - omega_d.
OperatorMatrix drive_hamiltonian(const SpinModel& m, const DriveSpec& d, double t);
TimeDependentHamiltonian drive_generator(const SpinModel& m, const DriveSpec& d,
                                         const CollectiveOps& ops);

// Excitation count sum_j (1 + <sigma_z^(j)>)/2.
double excited_count(const StateMatrix& rho);

// (2 g^2 / kappa) omega_c <J+J->.
double intensity(const SpinModel& m, double jpjm);

// kappa / (g^2 M). Throws DomainError unless M > 0.
double sr_time(const SpinModel& m, double M);

// M g^2 / (kappa delta_omega).
double visibility(const SpinModel& m, double M);

// Dispersive regime, chi = omega_c - omega_bar != 0 (DomainError otherwise).
// beta = 2 g^2 / chi.
double dispersive_beta(const SpinModel& m);
// kappa g^2 / chi^2.
double dispersive_rate(const SpinModel& m);
// g^2 N kappa / (chi^2 delta_omega).
double dispersive_visibility(const SpinModel& m, double n_qubits);
// (g / chi)^2 <= 0.1.
bool dispersive_valid(const SpinModel& m);

// sum_j (omega_j/2 - frame/2 + beta nbar) sigma_z^(j) + beta/2 J+J-, with the
// cavity replaced by its mean photon number nbar. `frame` is the frequency of
// a co-rotating frame; it commutes with everything in the model.
OperatorMatrix h_dispersive(const SpinModel& m, double photon_number, double frame = 0.0);

// Tavis-Cummings Hamiltonian on cavity (x) qubits, index photon * 2^N + qubits:
// sum_j (omega_j - frame)/2 sigma_z + (omega_c - frame) a^+a + g (J- a^+ + J+ a).
// Requires N <= 4 and photon_cutoff <= 20.
struct TavisCummings {
  OperatorMatrix hamiltonian;
  Collapse cavity_loss;    // rate kappa, operator a
  OperatorMatrix jpjm;     // J+J- on the joint space
  OperatorMatrix photons;  // a^+a
  OperatorMatrix excitations;  // sum sigma_z/2 + a^+a
  int photon_cutoff = 0;
};
inline constexpr int kMaxTavisCummingsQubits = 4;
inline constexpr int kMaxPhotonCutoff = 20;
TavisCummings h_full_tavis_cummings(const SpinModel& m, int photon_cutoff, double frame);

// Lifts a qubit state to cavity (x) qubits with the cavity in vacuum.
StateMatrix with_cavity_vacuum(const StateMatrix& qubits, int photon_cutoff);

// Qubit-only model H = sum_j energies_j/2 sigma_z + c J+J- with collapse
// rate D[J-]. Both the eliminated and the dispersive model have this form.
struct CollectiveDecayModel {
  std::vector<double> energies;
  double jpjm_coefficient = 0.0;
  double rate = 0.0;

  int n_qubits() const { return static_cast<int>(energies.size()); }
  OperatorMatrix hamiltonian(const CollectiveOps& ops) const;
  std::vector<Collapse> collapse(const CollectiveOps& ops) const;
};

// Energies omega_j - omega_bar, coefficient Re[chi g^2/Gamma^2], rate kappa g^2/|Gamma|^2.
CollectiveDecayModel eliminated_model(const SpinModel& m);
// Energies omega_j - frame + 2 beta nbar, coefficient beta/2, rate kappa g^2/chi^2.
CollectiveDecayModel dispersive_model(const SpinModel& m, double photon_number, double frame);

}  // namespace fluxsr::dynamics
