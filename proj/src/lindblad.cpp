#include "fluxsr/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fluxsr/common.hpp"

namespace fluxsr::dynamics {

namespace {

struct PreparedCollapse {
  double rate;
  OperatorMatrix op;
};

// Generator pieces in the form used by the right-hand side:
//   d rho/dt = -i H_eff rho + i (H_eff rho^+)^+ + sum 2 rate L (L rho^+)^+
// with H_eff = H - i sum rate L^+ L. Only sparse-times-dense products appear.
struct Generator {
  OperatorMatrix h_eff;
  std::vector<PreparedCollapse> collapse;
};

Generator prepare(const OperatorMatrix& h, std::span<const Collapse> collapse) {
  Generator g;
  g.h_eff = h;
  for (const auto& c : collapse) {
    g.h_eff -= cd(0.0, c.rate) * OperatorMatrix(OperatorMatrix(c.op.adjoint()) * c.op);
    g.collapse.push_back({c.rate, c.op});
  }
  g.h_eff.makeCompressed();
  return g;
}

void check_dims(const StateMatrix& rho, const OperatorMatrix& op, const char* what) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
    throw DomainError(std::string("dimension mismatch between state and ") + what);
  }
}

// General form; rho_dag must be rho^+.
void apply(const Generator& g, const StateMatrix& rho, const StateMatrix& rho_dag, StateMatrix& out) {
  out.noalias() = cd(0.0, -1.0) * (g.h_eff * rho);
  const StateMatrix right = g.h_eff * rho_dag;
  out += cd(0.0, 1.0) * right.adjoint();
  for (const auto& c : g.collapse) {
    const StateMatrix l_rho_dag = c.op * rho_dag;
    const StateMatrix back = l_rho_dag.adjoint();
    out.noalias() += (2.0 * c.rate) * (c.op * back);
  }
}

}  // namespace

OperatorMatrix TimeDependentHamiltonian::at(double t) const {
  OperatorMatrix h = constant;
  for (const auto& term : terms) h += term.coefficient(t) * term.op;
  return h;
}

std::size_t TimeSeries::channel(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("time series has no channel '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

const std::vector<double>& TimeSeries::operator[](const std::string& name) const {
  return values[channel(name)];
}

void TimeSeries::add_channel(std::string name) {
  names.push_back(std::move(name));
  values.emplace_back();
}

StateMatrix lindblad_rhs(const StateMatrix& rho, const OperatorMatrix& h,
                         std::span<const Collapse> collapse) {
  check_dims(rho, h, "Hamiltonian");
  for (const auto& c : collapse) check_dims(rho, c.op, "collapse operator");
  StateMatrix out;
  const StateMatrix rho_dag = rho.adjoint();
  apply(prepare(h, collapse), rho, rho_dag, out);
  return out;
}

double StepPolicy::step() const {
  double scale = std::numeric_limits<double>::infinity();
  auto consider = [&](double time) {
    if (time > 0.0 && std::isfinite(time)) scale = std::min(scale, time);
  };
  consider(tau_sr);
  if (lambda_max > 0.0) consider(1.0 / lambda_max);
  if (max_detuning > 0.0) consider(1.0 / max_detuning);
  if (!std::isfinite(scale)) throw DomainError("step policy has no finite time scale");
  return scale / divisor;
}

EvolveResult evolve(const StateMatrix& rho0, const TimeDependentHamiltonian& h,
                    std::span<const Collapse> collapse, const EvolveOptions& options,
                    std::span<const Observable> observables) {
  if (rho0.rows() != rho0.cols()) throw DomainError("state must be square");
  check_dims(rho0, h.constant, "Hamiltonian");
  for (const auto& term : h.terms) check_dims(rho0, term.op, "Hamiltonian term");
  for (const auto& c : collapse) check_dims(rho0, c.op, "collapse operator");
  for (const auto& o : observables) check_dims(rho0, o.op, "observable");
  if (!(options.t1 > options.t0) || !std::isfinite(options.t1 - options.t0)) {
    throw DomainError("time span must be finite with t1 > t0");
  }
  if (options.samples < 2) throw DomainError("need at least two sample times");
  if (!(options.max_step > 0.0)) throw DomainError("max_step must be > 0");

  const Generator gen = prepare(h.constant, collapse);
  // States stay Hermitian along the integration (checked at every sample), so
  // rho^+ = rho here and -i H_eff rho + h.c. needs a single product.
  auto rhs = [&](double t, const StateMatrix& rho, StateMatrix& out) {
    StateMatrix a = cd(0.0, -1.0) * (gen.h_eff * rho);
    for (const auto& term : h.terms) {
      const double c = term.coefficient(t);
      if (c != 0.0) a.noalias() += cd(0.0, -c) * (term.op * rho);
    }
    // L rho L^+ enters as half of it plus its adjoint, so out is Hermitian
    // to the last bit and rounding cannot leak into the trace.
    for (const auto& c : gen.collapse) {
      const StateMatrix back = (c.op * rho).adjoint();
      a.noalias() += c.rate * (c.op * back);
    }
    out = a + a.adjoint();
  };

  const double interval = (options.t1 - options.t0) / (options.samples - 1);
  const cd trace0 = rho0.trace();
  double max_step = options.max_step;

  for (int attempt = 0;; ++attempt) {
    const long sub = std::max<long>(1, static_cast<long>(std::ceil(interval / max_step - 1e-9)));
    const double step = interval / static_cast<double>(sub);

    EvolveResult result;
    result.step = step;
    result.series.names.reserve(observables.size() + 1);
    for (const auto& o : observables) result.series.add_channel(o.name);
    result.series.add_channel("trace");

    StateMatrix rho = rho0;
    StateMatrix k1, k2, k3, k4, tmp;
    bool drifted = false;
    std::ostringstream why;

    auto record = [&](double t) {
      result.series.times.push_back(t);
      for (std::size_t i = 0; i < observables.size(); ++i) {
        result.series.values[i].push_back(expectation(observables[i].op, rho).real());
      }
      const cd tr = rho.trace();
      result.series.values.back().push_back(tr.real());
      const double trace_drift = std::abs(tr - trace0);
      const double herm = hermiticity_error(rho);
      result.max_trace_drift = std::max(result.max_trace_drift, trace_drift);
      result.max_hermiticity_drift = std::max(result.max_hermiticity_drift, herm);
      if (!(trace_drift <= options.trace_tolerance && herm <= options.hermiticity_tolerance)) {
        drifted = true;
        why << "at t = " << t << " ns: trace drift " << trace_drift << ", hermiticity drift "
            << herm << " with step " << step << " ns";
      }
    };

    record(options.t0);
    for (int s = 1; s < options.samples && !drifted; ++s) {
      const double t_start = options.t0 + interval * (s - 1);
      for (long k = 0; k < sub; ++k) {
        const double t = t_start + step * static_cast<double>(k);
        rhs(t, rho, k1);
        tmp = rho + (0.5 * step) * k1;
        rhs(t + 0.5 * step, tmp, k2);
        tmp = rho + (0.5 * step) * k2;
        rhs(t + 0.5 * step, tmp, k3);
        tmp = rho + step * k3;
        rhs(t + step, tmp, k4);
        rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++result.steps;
      }
      record(s == options.samples - 1 ? options.t1 : options.t0 + interval * s);
    }

    if (!drifted) {
      result.final_state = std::move(rho);
      return result;
    }
    if (attempt >= options.max_halvings) {
      throw NumericalError("integration drift " + why.str() + " after " +
                           std::to_string(attempt) + " step halvings");
    }
    max_step = step / 2.0;
  }
}

}  // namespace fluxsr::dynamics
