#pragma once

// Dense-state Lindblad master equation with sparse operators, integrated by
// fixed-step fourth-order Runge-Kutta.
//
//   d rho / dt = -i [H(t), rho] + sum_k rate_k (2 L rho L^+ - L^+ L rho - rho L^+ L)

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fluxsr/operators.hpp"

namespace fluxsr::dynamics {

struct Collapse {
  double rate = 0.0;
  OperatorMatrix op;
};

// H(t) = constant + sum_k coefficient_k(t) operator_k.
struct TimeDependentHamiltonian {
  struct Term {
    std::function<double(double)> coefficient;
    OperatorMatrix op;
  };
  OperatorMatrix constant;
  std::vector<Term> terms;

  OperatorMatrix at(double t) const;
};

struct Observable {
  std::string name;
  OperatorMatrix op;
};

// Time-stamped scalar channels; every channel has one value per time.
struct TimeSeries {
  std::vector<double> times;  // ns, strictly increasing
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  std::size_t channel(const std::string& name) const;  // throws if absent
  const std::vector<double>& operator[](const std::string& name) const;
  void add_channel(std::string name);
};

// -i[H, rho] + sum rate D[L] rho. Throws DomainError on dimension mismatch.
StateMatrix lindblad_rhs(const StateMatrix& rho, const OperatorMatrix& h,
                         std::span<const Collapse> collapse);

// Step size min(tau_sr, 1/lambda_max, 1/max|detuning|) / divisor; terms whose
// time scale is not positive and finite are skipped.
struct StepPolicy {
  double tau_sr = 0.0;
  double lambda_max = 0.0;
  double max_detuning = 0.0;
  double divisor = 200.0;

  double step() const;
};

struct EvolveOptions {
  double t0 = 0.0;
  double t1 = 1.0;
  int samples = 2001;       // sample times, including t0 and t1
  double max_step = 1e-2;   // ns; reduced to divide each sample interval evenly
  double trace_tolerance = 1e-6;
  double hermiticity_tolerance = 1e-8;
  int max_halvings = 4;     // step halvings tried when a drift check fails
};

struct EvolveResult {
  TimeSeries series;  // one channel per observable (real part), plus "trace"
  StateMatrix final_state;
  double step = 0.0;
  long steps = 0;
  double max_trace_drift = 0.0;
  double max_hermiticity_drift = 0.0;
};

// Integrates from options.t0 to options.t1. Trace and Hermiticity drift are
// checked at every sample; on failure the step is halved and the run
// restarted, and after max_halvings a NumericalError naming the step is thrown.
EvolveResult evolve(const StateMatrix& rho0, const TimeDependentHamiltonian& h,
                    std::span<const Collapse> collapse, const EvolveOptions& options,
                    std::span<const Observable> observables);

}  // namespace fluxsr::dynamics
