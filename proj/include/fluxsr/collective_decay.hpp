#pragma once

// Collective decay H = sum_j e_j/2 sigma_z + c J+J-, collapse rate D[J-],
// integrated on the excitation-number blocks of the density matrix.
//
// Both H and the dissipator keep or lower the excitation number, so the
// blocks rho_n (states with exactly n excitations on both sides) obey a closed
// set of equations:
//
//   d rho_n/dt = G_n + G_n^+ + 2 rate L_{n+1} rho_{n+1} L_{n+1}^+
//   G_n = -i E rho_n - (rate + i c) K_n rho_n
//
// with L_n the restriction of J- to block n and K_n = L_n^+ L_n. Coherences
// between different excitation numbers never feed back into the blocks, so
// populations, <J+J-> and the excitation count are exact while the state is
// only sum_n C(N, n)^2 numbers instead of 4^N.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fluxsr/lindblad.hpp"
#include "fluxsr/model.hpp"

namespace fluxsr::dynamics {

inline constexpr int kMaxBlockQubits = 16;

// Block-diagonal part of a density matrix in one contiguous buffer.
struct BlockState {
  Eigen::VectorXcd data;
};

using Qubit2 = Eigen::Matrix2cd;  // single-qubit density matrix, index 1 = excited

struct DecayOptions {
  double t1 = 1.0;          // window [0, t1]
  int samples = 2001;       // sample times including both ends
  // ns; rounded down to a divisor of the sample interval, or to a whole
  // number of intervals when larger than one
  double max_step = 1e-2;
  // Stop once the running maximum of <J+J-> provably cannot be exceeded later.
  bool stop_when_max_resolved = false;
  double trace_tolerance = 1e-6;
  double hermiticity_tolerance = 1e-8;
  int max_halvings = 4;
};

struct DecayResult {
  TimeSeries series;  // channels "jpjm", "excited_count", "trace"
  double max_jpjm = 0.0;
  double t_max = 0.0;
  bool stopped_early = false;
  double step = 0.0;
  long steps = 0;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
  BlockState final_state;
};

class CollectiveDecaySolver {
 public:
  explicit CollectiveDecaySolver(CollectiveDecayModel model);

  int n_qubits() const { return n_; }
  const CollectiveDecayModel& model() const { return model_; }
  std::size_t state_size() const { return offset_.back(); }
  // C(N, n) computational states with n excitations, ascending.
  std::span<const std::uint32_t> block_states(int n) const { return states_[n]; }

  BlockState zero_state() const;
  // |bits><bits|.
  BlockState basis_state(std::uint32_t bits) const;
  // Block part of the product state (x)_j rho_j.
  BlockState product_state(std::span<const Qubit2> qubits) const;
  BlockState from_dense(const StateMatrix& rho) const;
  // Dense matrix with every coherence between different excitation numbers zero.
  StateMatrix to_dense(const BlockState& s) const;

  Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  block(const BlockState& s, int n) const;

  void rhs(const BlockState& s, BlockState& out) const;

  double trace(const BlockState& s) const;
  double jpjm(const BlockState& s) const;
  double excited_count(const BlockState& s) const;
  // Per-block populations tr rho_n.
  std::vector<double> populations(const BlockState& s) const;
  double hermiticity_error(const BlockState& s) const;

  // Fixed-step RK4 over [0, options.t1]. Samples inside a step that spans
  // several intervals come from cubic Hermite interpolation of the
  // observables. Trace or Hermiticity drift beyond tolerance (checked at step
  // ends) halves the step and restarts; after max_halvings a NumericalError
  // is thrown.
  DecayResult run(const BlockState& initial, const DecayOptions& options) const;

 private:
  using RowMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  // Adjacency between block n and block n+1 in compressed rows.
  struct Links {
    std::vector<std::uint32_t> start;  // size rows + 1
    std::vector<std::uint32_t> index;
  };

  double bound(const BlockState& s) const;

  int n_;
  CollectiveDecayModel model_;
  std::vector<std::vector<std::uint32_t>> states_;
  std::vector<std::uint32_t> position_;  // position of each computational state in its block
  std::vector<std::size_t> offset_;      // start of block n in the buffer; size N + 2
  std::vector<std::vector<double>> energy_;  // diagonal of H_0 per block
  std::vector<Links> up_;    // up_[n]: states of block n+1 reached by adding one excitation
  std::vector<Links> down_;  // down_[n]: states of block n-1 reached by removing one
  std::vector<double> bound_weight_;  // max eigenvalue of K over blocks <= n
};

}  // namespace fluxsr::dynamics
