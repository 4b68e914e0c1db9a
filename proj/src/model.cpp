#include "fluxsr/model.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <string>

#include "fluxsr/common.hpp"

namespace fluxsr::dynamics {

void SpinModel::validate() const {
  if (omegas.empty()) throw DomainError("spin model needs at least one qubit");
  for (double w : omegas) {
    if (!std::isfinite(w)) throw DomainError("qubit frequencies must be finite");
  }
  if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("g must be > 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be > 0");
  if (!(delta_omega >= 0.0)) throw DomainError("delta_omega must be >= 0");
  if (!std::isfinite(omega_bar) || !std::isfinite(omega_c)) {
    throw DomainError("omega_bar and omega_c must be finite");
  }
}

bool SpinModel::bad_cavity() const {
  const double n = static_cast<double>(omegas.size());
  return kappa >= 10.0 * delta_omega && kappa >= 10.0 * g * g * n / kappa;
}

void DriveSpec::validate() const {
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw DomainError("lambda_max must be > 0");
  if (!std::isfinite(omega_d)) throw DomainError("omega_d must be finite");
}

double DriveSpec::sigma() const { return std::sqrt(kPi) / lambda_max; }

double DriveSpec::b() const { return 4.0 * sigma() * std::sqrt(2.0 * std::log(2.0)); }

double DriveSpec::envelope(double t) const {
  const double x = (t - b()) / sigma();
  return lambda_max * std::exp(-x * x);
}

double jpjm_coefficient(const SpinModel& m) {
  const std::complex<double> gamma(m.kappa, m.chi());
  return (m.chi() * m.g * m.g / (gamma * gamma)).real();
}

double superradiant_rate(const SpinModel& m) {
  return m.kappa * m.g * m.g / (m.kappa * m.kappa + m.chi() * m.chi());
}

OperatorMatrix CollectiveDecayModel::hamiltonian(const CollectiveOps& ops) const {
  if (ops.n_qubits != n_qubits()) throw DomainError("operator set does not match the model size");
  OperatorMatrix h = jpjm_coefficient * OperatorMatrix(ops.jp * ops.jm);
  for (int j = 0; j < n_qubits(); ++j) h += (0.5 * energies[j]) * ops.sz[j];
  h.prune(cd(0.0));
  return h;
}

std::vector<Collapse> CollectiveDecayModel::collapse(const CollectiveOps& ops) const {
  return {Collapse{rate, ops.jm}};
}

CollectiveDecayModel eliminated_model(const SpinModel& m) {
  m.validate();
  CollectiveDecayModel out;
  for (double w : m.omegas) out.energies.push_back(w - m.omega_bar);
  out.jpjm_coefficient = jpjm_coefficient(m);
  out.rate = superradiant_rate(m);
  return out;
}

OperatorMatrix h_ae(const SpinModel& m, const CollectiveOps& ops) {
  return eliminated_model(m).hamiltonian(ops);
}

OperatorMatrix h_ae(const SpinModel& m) { return h_ae(m, collective_ops(m.n_qubits())); }

OperatorMatrix drive_hamiltonian(const SpinModel& m, const DriveSpec& d, double t) {
  return drive_generator(m, d, collective_ops(m.n_qubits())).at(t);
}

TimeDependentHamiltonian drive_generator(const SpinModel& m, const DriveSpec& d,
                                         const CollectiveOps& ops) {
  m.validate();
  d.validate();
  if (ops.n_qubits != m.n_qubits()) throw DomainError("operator set does not match the model size");
  TimeDependentHamiltonian h;
  const Eigen::Index dim = Eigen::Index{1} << m.n_qubits();
  h.constant = OperatorMatrix(dim, dim);
  OperatorMatrix sx_sum(dim, dim);
  for (int j = 0; j < m.n_qubits(); ++j) {
    h.constant += (0.5 * (m.omegas[j] - d.omega_d)) * ops.sz[j];
    sx_sum += ops.sx[j];
  }
  h.terms.push_back({[d](double t) { return 0.5 * d.envelope(t); }, std::move(sx_sum)});
  return h;
}

double excited_count(const StateMatrix& rho) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    sum += std::popcount(static_cast<std::uint64_t>(i)) * rho(i, i).real();
  }
  return sum;
}

double intensity(const SpinModel& m, double jpjm) { return 2.0 * m.g * m.g / m.kappa * m.omega_c * jpjm; }

double sr_time(const SpinModel& m, double M) {
  if (!(M > 0.0)) throw DomainError("sr_time needs M > 0");
  return m.kappa / (m.g * m.g * M);
}

double visibility(const SpinModel& m, double M) { return M * m.g * m.g / (m.kappa * m.delta_omega); }

namespace {

void require_dispersive(const SpinModel& m) {
  if (m.chi() == 0.0) throw DomainError("dispersive model needs omega_c != omega_bar");
}

}  // namespace

double dispersive_beta(const SpinModel& m) {
  require_dispersive(m);
  return 2.0 * m.g * m.g / m.chi();
}

double dispersive_rate(const SpinModel& m) {
  require_dispersive(m);
  return m.kappa * m.g * m.g / (m.chi() * m.chi());
}

double dispersive_visibility(const SpinModel& m, double n_qubits) {
  require_dispersive(m);
  return m.g * m.g * n_qubits * m.kappa / (m.chi() * m.chi() * m.delta_omega);
}

bool dispersive_valid(const SpinModel& m) {
  require_dispersive(m);
  const double r = m.g / m.chi();
  return r * r <= 0.1;
}

CollectiveDecayModel dispersive_model(const SpinModel& m, double photon_number, double frame) {
  m.validate();
  const double beta = dispersive_beta(m);
  CollectiveDecayModel out;
  // (omega_j/2 + beta nbar) sigma_z = energy/2 sigma_z with energy = omega_j + 2 beta nbar.
  for (double w : m.omegas) out.energies.push_back(w - frame + 2.0 * beta * photon_number);
  out.jpjm_coefficient = 0.5 * beta;
  out.rate = dispersive_rate(m);
  return out;
}

OperatorMatrix h_dispersive(const SpinModel& m, double photon_number, double frame) {
  return dispersive_model(m, photon_number, frame).hamiltonian(collective_ops(m.n_qubits()));
}

TavisCummings h_full_tavis_cummings(const SpinModel& m, int photon_cutoff, double frame) {
  m.validate();
  if (m.n_qubits() > kMaxTavisCummingsQubits) {
    throw DomainError("full Tavis-Cummings model is limited to " +
                      std::to_string(kMaxTavisCummingsQubits) + " qubits");
  }
  if (photon_cutoff < 1 || photon_cutoff > kMaxPhotonCutoff) {
    throw DomainError("photon_cutoff must lie in [1, " + std::to_string(kMaxPhotonCutoff) + "]");
  }
  const auto ops = collective_ops(m.n_qubits());
  const OperatorMatrix a = annihilation(photon_cutoff);
  const OperatorMatrix adag = a.adjoint();
  const OperatorMatrix n_op = adag * a;
  const OperatorMatrix id_c = identity(photon_cutoff + 1);
  const OperatorMatrix id_q = identity(Eigen::Index{1} << m.n_qubits());

  TavisCummings tc;
  tc.photon_cutoff = photon_cutoff;
  OperatorMatrix qubit_part = 0.0 * id_q;
  OperatorMatrix sz_half = 0.0 * id_q;
  for (int j = 0; j < m.n_qubits(); ++j) {
    qubit_part += (0.5 * (m.omegas[j] - frame)) * ops.sz[j];
    sz_half += 0.5 * ops.sz[j];
  }
  tc.hamiltonian = kron(id_c, qubit_part) + (m.omega_c - frame) * kron(n_op, id_q) +
                   m.g * (kron(adag, ops.jm) + kron(a, ops.jp));
  tc.hamiltonian.prune(cd(0.0));
  tc.cavity_loss = Collapse{m.kappa, kron(a, id_q)};
  tc.jpjm = kron(id_c, OperatorMatrix(ops.jp * ops.jm));
  tc.photons = kron(n_op, id_q);
  tc.excitations = kron(id_c, sz_half) + tc.photons;
  return tc;
}

StateMatrix with_cavity_vacuum(const StateMatrix& qubits, int photon_cutoff) {
  const Eigen::Index dq = qubits.rows();
  StateMatrix out = StateMatrix::Zero(dq * (photon_cutoff + 1), dq * (photon_cutoff + 1));
  out.topLeftCorner(dq, dq) = qubits;
  return out;
}

}  // namespace fluxsr::dynamics
