#include "fluxsr/operators.hpp"

#include <string>

#include "fluxsr/common.hpp"

namespace fluxsr::dynamics {

namespace {

using Triplet = Eigen::Triplet<cd>;

void require_qubits(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw DomainError("qubit count must lie in [1, " + std::to_string(kMaxQubits) + "] (got " +
                      std::to_string(n_qubits) + ")");
  }
}

void require_qubit(int n_qubits, int qubit) {
  require_qubits(n_qubits);
  if (qubit < 0 || qubit >= n_qubits) throw DomainError("qubit index out of range");
}

OperatorMatrix from_triplets(Eigen::Index dim, const std::vector<Triplet>& t) {
  OperatorMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

OperatorMatrix sigma_z(int n_qubits, int qubit) {
  require_qubit(n_qubits, qubit);
  const std::uint32_t dim = 1u << n_qubits;
  std::vector<Triplet> t;
  t.reserve(dim);
  for (std::uint32_t s = 0; s < dim; ++s) t.emplace_back(s, s, (s >> qubit) & 1u ? 1.0 : -1.0);
  return from_triplets(dim, t);
}

OperatorMatrix sigma_x(int n_qubits, int qubit) {
  require_qubit(n_qubits, qubit);
  const std::uint32_t dim = 1u << n_qubits;
  std::vector<Triplet> t;
  t.reserve(dim);
  for (std::uint32_t s = 0; s < dim; ++s) t.emplace_back(s ^ (1u << qubit), s, 1.0);
  return from_triplets(dim, t);
}

OperatorMatrix sigma_minus(int n_qubits, int qubit) {
  require_qubit(n_qubits, qubit);
  const std::uint32_t dim = 1u << n_qubits;
  const std::uint32_t bit = 1u << qubit;
  std::vector<Triplet> t;
  t.reserve(dim / 2);
  for (std::uint32_t s = 0; s < dim; ++s) {
    if (s & bit) t.emplace_back(s & ~bit, s, 1.0);
  }
  return from_triplets(dim, t);
}

OperatorMatrix identity(Eigen::Index dim) {
  OperatorMatrix m(dim, dim);
  m.setIdentity();
  return m;
}

CollectiveOps collective_ops(int n_qubits) {
  require_qubits(n_qubits);
  CollectiveOps ops;
  ops.n_qubits = n_qubits;
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  ops.jm = OperatorMatrix(dim, dim);
  ops.jz = OperatorMatrix(dim, dim);
  for (int j = 0; j < n_qubits; ++j) {
    ops.sz.push_back(sigma_z(n_qubits, j));
    ops.sx.push_back(sigma_x(n_qubits, j));
    ops.jm += sigma_minus(n_qubits, j);
    ops.jz += ops.sz.back();
  }
  ops.jp = ops.jm.adjoint();
  return ops;
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ca = 0; ca < a.outerSize(); ++ca) {
    for (OperatorMatrix::InnerIterator ia(a, ca); ia; ++ia) {
      for (Eigen::Index cb = 0; cb < b.outerSize(); ++cb) {
        for (OperatorMatrix::InnerIterator ib(b, cb); ib; ++ib) {
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
        }
      }
    }
  }
  OperatorMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

OperatorMatrix annihilation(int photon_cutoff) {
  if (photon_cutoff < 1) throw DomainError("photon_cutoff must be >= 1");
  std::vector<Triplet> t;
  for (int n = 1; n <= photon_cutoff; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  return from_triplets(photon_cutoff + 1, t);
}

StateMatrix basis_state(int n_qubits, std::uint32_t bits) {
  require_qubits(n_qubits);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (bits >= static_cast<std::uint32_t>(dim)) throw DomainError("basis state out of range");
  StateMatrix rho = StateMatrix::Zero(dim, dim);
  rho(bits, bits) = 1.0;
  return rho;
}

double hermiticity_error(const StateMatrix& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

double hermiticity_error(const OperatorMatrix& a) {
  const OperatorMatrix d = a - OperatorMatrix(a.adjoint());
  double err = 0.0;
  for (Eigen::Index c = 0; c < d.outerSize(); ++c) {
    for (OperatorMatrix::InnerIterator it(d, c); it; ++it) err = std::max(err, std::abs(it.value()));
  }
  return err;
}

cd expectation(const OperatorMatrix& op, const StateMatrix& rho) {
  // Tr(op rho) = sum_{ij} op_ij rho_ji
  cd sum = 0.0;
  for (Eigen::Index c = 0; c < op.outerSize(); ++c) {
    for (OperatorMatrix::InnerIterator it(op, c); it; ++it) sum += it.value() * rho(it.col(), it.row());
  }
  return sum;
}

}  // namespace fluxsr::dynamics
