#include "fluxsr/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <lapacke.h>

namespace fluxsr::circuit {

namespace {

using cd = std::complex<double>;

void require_double_well(double alpha) {
  if (!(alpha > 0.5)) {
    throw DomainError("alpha must exceed 0.5 for a double-well potential (got " +
                      std::to_string(alpha) + ")");
  }
}

void require_cutoff(int basis_cutoff) {
  if (basis_cutoff < 5) {
    throw DomainError("basis_cutoff must be >= 5 (got " + std::to_string(basis_cutoff) + ")");
  }
}

}  // namespace

void JunctionSet::validate() const {
  require_double_well(alpha);
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw DomainError("junction areas beta1, beta2 must be > 0");
  if (!(ej_over_ec > 0.0)) throw DomainError("ej_over_ec must be > 0");
  if (!(ej > 0.0)) throw DomainError("ej must be > 0");
}

double potential(double phi_p, double phi_m, FluxBias f, double alpha) {
  return 2.0 + alpha - std::cos(phi_p + phi_m) - std::cos(phi_p - phi_m) -
         alpha * std::cos(kTwoPi * f.f - 2.0 * phi_m);
}

double junction_potential(const JunctionSet& j, double phi_p, double phi_m, FluxBias f) {
  return j.beta1 * (1.0 - std::cos(phi_p + phi_m)) + j.beta2 * (1.0 - std::cos(phi_p - phi_m)) +
         j.alpha * (1.0 - std::cos(kTwoPi * f.f - 2.0 * phi_m));
}

std::pair<double, double> potential_minima(double alpha) {
  require_double_well(alpha);
  const double phi = std::acos(1.0 / (2.0 * alpha));
  return {-phi, phi};
}

double barrier_height(double alpha) {
  require_double_well(alpha);
  return -2.0 + 2.0 * alpha + 1.0 / (2.0 * alpha);
}

double potential_gradient(double alpha) {
  require_double_well(alpha);
  const double x = 1.0 / (2.0 * alpha);
  return kTwoPi * std::sqrt(1.0 - x * x);
}

int basis_dimension(int basis_cutoff) { return (2 * basis_cutoff + 1) * (2 * basis_cutoff + 1); }

Eigen::MatrixXcd charge_basis_hamiltonian(const JunctionSet& j, FluxBias f, int basis_cutoff) {
  j.validate();
  require_cutoff(basis_cutoff);

  const int side = 2 * basis_cutoff + 1;
  const int dim = side * side;
  auto index = [&](int n1, int n2) { return (n1 + basis_cutoff) * side + (n2 + basis_cutoff); };
  auto inside = [&](int n) { return n >= -basis_cutoff && n <= basis_cutoff; };

  // Capacitance matrix in (phi_p, phi_m), in units of C (Phi_0 / 2 pi)^2.
  // phi_3 = 2 pi f - 2 phi_m after imposing the flux constraint.
  const double m_pp = j.beta1 + j.beta2;
  const double m_pm = j.beta1 - j.beta2;
  const double m_mm = j.beta1 + j.beta2 + 4.0 * j.alpha;
  const double det = m_pp * m_mm - m_pm * m_pm;
  const double inv_pp = m_mm / det;
  const double inv_pm = -m_pm / det;
  const double inv_mm = m_pp / det;

  const double ec = j.ej / j.ej_over_ec;
  const double constant = j.ej * (j.beta1 + j.beta2 + j.alpha);
  const cd flux_phase = std::polar(1.0, kTwoPi * f.f);

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n1 = -basis_cutoff; n1 <= basis_cutoff; ++n1) {
    for (int n2 = -basis_cutoff; n2 <= basis_cutoff; ++n2) {
      const int i = index(n1, n2);
      const double k = n1 + n2;
      const double l = n1 - n2;
      h(i, i) = 4.0 * ec * (inv_pp * k * k + 2.0 * inv_pm * k * l + inv_mm * l * l) + constant;

      // -beta1 cos(phi_1): n1 -> n1 + 1
      if (inside(n1 + 1)) {
        const int t = index(n1 + 1, n2);
        h(t, i) = -0.5 * j.ej * j.beta1;
        h(i, t) = h(t, i);
      }
      // -beta2 cos(phi_2): n2 -> n2 + 1
      if (inside(n2 + 1)) {
        const int t = index(n1, n2 + 1);
        h(t, i) = -0.5 * j.ej * j.beta2;
        h(i, t) = h(t, i);
      }
      // -alpha cos(2 pi f - phi_1 + phi_2): (n1, n2) -> (n1 - 1, n2 + 1)
      if (inside(n1 - 1) && inside(n2 + 1)) {
        const int t = index(n1 - 1, n2 + 1);
        h(t, i) = -0.5 * j.ej * j.alpha * flux_phase;
        h(i, t) = std::conj(h(t, i));
      }
    }
  }
  return h;
}

RealForm real_symmetric_form(const Eigen::MatrixXcd& h) {
  // Index i pairs with dim - 1 - i (n -> -n); the middle index is n = 0.
  const Eigen::Index dim = h.rows();
  const Eigen::Index half = dim / 2;
  const double s = 1.0 / std::sqrt(2.0);

  // Columns: [0, half) symmetric combinations, half the n = 0 state,
  // (half, dim) antisymmetric combinations times i.
  auto column = [&](Eigen::Index c, Eigen::Index& a, cd& wa, Eigen::Index& b, cd& wb) {
    if (c < half) {
      a = c, wa = s, b = dim - 1 - c, wb = s;
    } else if (c == half) {
      a = half, wa = 1.0, b = -1, wb = 0.0;
    } else {
      const Eigen::Index p = c - half - 1;
      a = p, wa = cd(0.0, s), b = dim - 1 - p, wb = cd(0.0, -s);
    }
  };

  // t = h u, then r = u^dagger t.
  Eigen::MatrixXcd t(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    Eigen::Index a, b;
    cd wa, wb;
    column(c, a, wa, b, wb);
    t.col(c) = h.col(a) * wa;
    if (b >= 0) t.col(c) += h.col(b) * wb;
  }
  RealForm out;
  out.matrix.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    Eigen::Index a, b;
    cd wa, wb;
    column(r, a, wa, b, wb);
    for (Eigen::Index c = 0; c < dim; ++c) {
      cd v = std::conj(wa) * t(a, c);
      if (b >= 0) v += std::conj(wb) * t(b, c);
      out.matrix(r, c) = v.real();
      out.imag_residue = std::max(out.imag_residue, std::abs(v.imag()));
    }
  }
  return out;
}

Spectrum diagonalize(const JunctionSet& j, FluxBias f, int basis_cutoff, int n_levels) {
  const Eigen::MatrixXcd h = charge_basis_hamiltonian(j, f, basis_cutoff);
  RealForm real = real_symmetric_form(h);

  const lapack_int dim = static_cast<lapack_int>(real.matrix.rows());
  if (n_levels < 2 || n_levels > dim) throw DomainError("n_levels must lie in [2, dimension]");

  // Scale of the spectrum for the residue check: max absolute row sum.
  const double norm = real.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (real.imag_residue > 1e-10 * norm) {
    throw NumericalError("charge-basis Hamiltonian is not real in the symmetrized basis (residue " +
                         std::to_string(real.imag_residue) + ")");
  }

  std::vector<double> w(static_cast<std::size_t>(dim));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(dim));
  double unused_z = 0.0;
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'U', dim, real.matrix.data(), dim, 0.0, 0.0, 1,
                     n_levels, 0.0, &found, w.data(), &unused_z, 1, support.data());
  if (info != 0 || found != n_levels) {
    throw NumericalError("dsyevr failed (info " + std::to_string(info) + ", found " +
                         std::to_string(found) + ")");
  }

  Spectrum s;
  s.eigenvalues.assign(w.begin(), w.begin() + n_levels);
  s.basis_cutoff = basis_cutoff;
  s.dimension = dim;
  if (!std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end())) {
    throw NumericalError("eigenvalues returned out of order");
  }
  return s;
}

double qubit_gap(const JunctionSet& j, FluxBias f, int basis_cutoff) {
  const Spectrum s = diagonalize(j, f, basis_cutoff, 2);
  return s.eigenvalues[1] - s.eigenvalues[0];
}

TwoLevelFit fit_two_level(const JunctionSet& j, int basis_cutoff) {
  TwoLevelFit fit;
  const double delta = qubit_gap(j, FluxBias{0.5}, basis_cutoff);
  if (!(delta > 0.0)) throw NumericalError("non-positive tunneling gap at f = 1/2");

  std::vector<double> positive;
  for (double x : kFitOffsets) positive.push_back(qubit_gap(j, FluxBias{0.5 + x}, basis_cutoff));

  for (std::size_t i = kFitOffsets.size(); i-- > 0;) {
    fit.offsets.push_back(-kFitOffsets[i]);
    fit.gaps.push_back(positive[i]);
  }
  fit.offsets.push_back(0.0);
  fit.gaps.push_back(delta);
  for (std::size_t i = 0; i < kFitOffsets.size(); ++i) {
    fit.offsets.push_back(kFitOffsets[i]);
    fit.gaps.push_back(positive[i]);
  }

  // Linear least squares on omega^2 - delta^2 = ip^2 x^2 for the start value,
  // then Gauss-Newton on the residual omega - sqrt(ip^2 x^2 + delta^2).
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    const double x2 = fit.offsets[i] * fit.offsets[i];
    num += x2 * (fit.gaps[i] * fit.gaps[i] - delta * delta);
    den += x2 * x2;
  }
  double ip = std::sqrt(std::max(num / den, 0.0));
  if (!(ip > 0.0)) throw NumericalError("gap does not grow away from f = 1/2");

  for (int iter = 0; iter < 100; ++iter) {
    double jtj = 0.0, jtr = 0.0;
    for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
      const double x = fit.offsets[i];
      const double model = std::hypot(ip * x, delta);
      const double d = ip * x * x / model;
      jtj += d * d;
      jtr += d * (fit.gaps[i] - model);
    }
    const double step = jtr / jtj;
    ip += step;
    if (std::abs(step) <= 1e-15 * ip) break;
  }

  double ss = 0.0;
  for (std::size_t i = 0; i < fit.offsets.size(); ++i) {
    const double r = fit.gaps[i] - std::hypot(ip * fit.offsets[i], delta);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(fit.offsets.size()));
  fit.params = QubitParams{delta, ip};
  return fit;
}

QubitParams extract_qubit_params(const JunctionSet& j, int basis_cutoff, double fit_tolerance) {
  const TwoLevelFit fit = fit_two_level(j, basis_cutoff);
  if (fit.rms_residual > fit_tolerance * fit.params.delta) {
    throw NumericalError("two-level fit residual " + std::to_string(fit.rms_residual) +
                         " GHz exceeds " + std::to_string(fit_tolerance) +
                         " * delta; spectrum is not two-level near f = 1/2");
  }
  return fit.params;
}

double ip_amperes(const QubitParams& q) {
  return q.ip * 1e9 * units::kPlanck / (2.0 * units::kFluxQuantum);
}

}  // namespace fluxsr::circuit
