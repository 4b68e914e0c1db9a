#pragma once

// Sparse operators on the N-qubit computational basis. Basis index bit j is
// qubit j, with 1 = excited.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fluxsr/common.hpp"

namespace fluxsr::dynamics {

using cd = std::complex<double>;
using OperatorMatrix = Eigen::SparseMatrix<cd, Eigen::ColMajor>;
using StateMatrix = Eigen::MatrixXcd;

// Largest qubit count for which full 2^N operators are built.
inline constexpr int kMaxQubits = 14;

struct CollectiveOps {
  int n_qubits = 0;
  OperatorMatrix jp;  // sum_j sigma_+^(j)
  OperatorMatrix jm;  // sum_j sigma_-^(j), equal to jp.adjoint()
  OperatorMatrix jz;  // sum_j sigma_z^(j)
  std::vector<OperatorMatrix> sz;
  std::vector<OperatorMatrix> sx;
};

// Throws DomainError unless 1 <= n_qubits <= kMaxQubits.
CollectiveOps collective_ops(int n_qubits);

OperatorMatrix sigma_z(int n_qubits, int qubit);
OperatorMatrix sigma_x(int n_qubits, int qubit);
OperatorMatrix sigma_minus(int n_qubits, int qubit);
OperatorMatrix identity(Eigen::Index dim);

// Kronecker product a (x) b with b on the low (fast) index.
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);

// Truncated cavity annihilation operator on photon numbers 0..cutoff.
OperatorMatrix annihilation(int photon_cutoff);

// |bits><bits| on n qubits.
StateMatrix basis_state(int n_qubits, std::uint32_t bits);

// Largest |A - A^dagger| element.
double hermiticity_error(const StateMatrix& a);
double hermiticity_error(const OperatorMatrix& a);

// Tr(op rho).
cd expectation(const OperatorMatrix& op, const StateMatrix& rho);

}  // namespace fluxsr::dynamics
