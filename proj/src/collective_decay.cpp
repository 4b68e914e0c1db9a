#include "fluxsr/collective_decay.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <string>

#include "fluxsr/common.hpp"

namespace fluxsr::dynamics {

namespace {

using ConstRowMap =
    Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMap = Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

CollectiveDecaySolver::CollectiveDecaySolver(CollectiveDecayModel model) : model_(std::move(model)) {
  n_ = model_.n_qubits();
  if (n_ < 1 || n_ > kMaxBlockQubits) {
    throw DomainError("block solver supports 1 to " + std::to_string(kMaxBlockQubits) + " qubits");
  }
  if (!(model_.rate >= 0.0) || !std::isfinite(model_.rate) || !std::isfinite(model_.jpjm_coefficient)) {
    throw DomainError("collective decay model needs a finite rate >= 0 and a finite J+J- coefficient");
  }
  for (double e : model_.energies) {
    if (!std::isfinite(e)) throw DomainError("qubit energies must be finite");
  }

  const std::uint32_t dim = 1u << n_;
  states_.assign(n_ + 1, {});
  position_.assign(dim, 0);
  for (std::uint32_t s = 0; s < dim; ++s) {
    auto& block = states_[std::popcount(s)];
    position_[s] = static_cast<std::uint32_t>(block.size());
    block.push_back(s);
  }

  offset_.assign(n_ + 2, 0);
  for (int n = 0; n <= n_; ++n) offset_[n + 1] = offset_[n] + states_[n].size() * states_[n].size();

  energy_.resize(n_ + 1);
  for (int n = 0; n <= n_; ++n) {
    for (std::uint32_t s : states_[n]) {
      double e = 0.0;
      for (int j = 0; j < n_; ++j) e += 0.5 * model_.energies[j] * ((s >> j) & 1u ? 1.0 : -1.0);
      energy_[n].push_back(e);
    }
  }

  up_.resize(n_ + 1);
  down_.resize(n_ + 1);
  for (int n = 0; n <= n_; ++n) {
    auto& up = up_[n];
    auto& down = down_[n];
    up.start.push_back(0);
    down.start.push_back(0);
    for (std::uint32_t s : states_[n]) {
      for (int j = 0; j < n_; ++j) {
        const std::uint32_t bit = 1u << j;
        if (s & bit) {
          down.index.push_back(position_[s & ~bit]);
        } else {
          up.index.push_back(position_[s | bit]);
        }
      }
      up.start.push_back(static_cast<std::uint32_t>(up.index.size()));
      down.start.push_back(static_cast<std::uint32_t>(down.index.size()));
    }
  }

  bound_weight_.assign(n_ + 1, 0.0);
  for (int n = 1; n <= n_; ++n) {
    bound_weight_[n] = std::max(bound_weight_[n - 1], static_cast<double>(n) * (n_ - n + 1));
  }
}

BlockState CollectiveDecaySolver::zero_state() const {
  return BlockState{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(state_size()))};
}

BlockState CollectiveDecaySolver::basis_state(std::uint32_t bits) const {
  if (bits >= (1u << n_)) throw DomainError("basis state out of range");
  BlockState s = zero_state();
  const int n = std::popcount(bits);
  const std::size_t d = states_[n].size();
  s.data[static_cast<Eigen::Index>(offset_[n] + position_[bits] * (d + 1))] = 1.0;
  return s;
}

BlockState CollectiveDecaySolver::product_state(std::span<const Qubit2> qubits) const {
  if (static_cast<int>(qubits.size()) != n_) throw DomainError("product state needs one matrix per qubit");
  BlockState s = zero_state();
  for (int n = 0; n <= n_; ++n) {
    const auto& st = states_[n];
    const std::size_t d = st.size();
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        std::complex<double> v = 1.0;
        for (int j = 0; j < n_; ++j) v *= qubits[j]((st[r] >> j) & 1u, (st[c] >> j) & 1u);
        s.data[static_cast<Eigen::Index>(offset_[n] + r * d + c)] = v;
      }
    }
  }
  return s;
}

BlockState CollectiveDecaySolver::from_dense(const StateMatrix& rho) const {
  if (rho.rows() != (Eigen::Index{1} << n_) || rho.cols() != rho.rows()) {
    throw DomainError("dense state has the wrong dimension");
  }
  BlockState s = zero_state();
  for (int n = 0; n <= n_; ++n) {
    const auto& st = states_[n];
    const std::size_t d = st.size();
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) s.data[static_cast<Eigen::Index>(offset_[n] + r * d + c)] = rho(st[r], st[c]);
    }
  }
  return s;
}

StateMatrix CollectiveDecaySolver::to_dense(const BlockState& s) const {
  const Eigen::Index dim = Eigen::Index{1} << n_;
  StateMatrix rho = StateMatrix::Zero(dim, dim);
  for (int n = 0; n <= n_; ++n) {
    const auto& st = states_[n];
    const auto b = block(s, n);
    for (std::size_t r = 0; r < st.size(); ++r) {
      for (std::size_t c = 0; c < st.size(); ++c) rho(st[r], st[c]) = b(r, c);
    }
  }
  return rho;
}

ConstRowMap CollectiveDecaySolver::block(const BlockState& s, int n) const {
  const auto d = static_cast<Eigen::Index>(states_[n].size());
  return ConstRowMap(s.data.data() + offset_[n], d, d);
}

namespace {

constexpr Eigen::Index kTile = 32;
constexpr Eigen::Index kStrip = 64;

// dst[0, len) = sum over k of base[idx[k] * stride + (0, len)]. Sources are
// summed in registers a chunk at a time, so dst is written once.
inline void gather_rows(std::complex<double>* dst, const std::complex<double>* base, Eigen::Index stride,
                        const std::uint32_t* idx, std::uint32_t count, Eigen::Index len) {
  constexpr int kMaxSources = 32;
  const double* src[kMaxSources];
  for (std::uint32_t k = 0; k < count; ++k) src[k] = reinterpret_cast<const double*>(base + idx[k] * stride);
  double* d = reinterpret_cast<double*>(dst);
  const Eigen::Index n = 2 * len;
  constexpr Eigen::Index kChunk = 8;
  Eigen::Index i = 0;
  for (; i + kChunk <= n; i += kChunk) {
    double acc[kChunk] = {};
    for (std::uint32_t k = 0; k < count; ++k) {
      const double* s = src[k] + i;
      for (Eigen::Index j = 0; j < kChunk; ++j) acc[j] += s[j];
    }
    for (Eigen::Index j = 0; j < kChunk; ++j) d[i + j] = acc[j];
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::uint32_t k = 0; k < count; ++k) acc += src[k][i];
    d[i] = acc;
  }
}

}  // namespace

void CollectiveDecaySolver::rhs(const BlockState& s, BlockState& out) const {
  using cplx = std::complex<double>;
  if (out.data.size() != s.data.size()) out.data.resize(s.data.size());
  const double damp_re = model_.rate, damp_im = model_.jpjm_coefficient;
  const double feed = 2.0 * model_.rate;

  // Blocks are visited upwards: block n is assigned first and the jump term of
  // block n + 1 is added to it on the next pass.
  thread_local std::vector<cplx> x_buf, k_buf;
  for (int n = 0; n <= n_; ++n) {
    const auto d = static_cast<Eigen::Index>(states_[n].size());
    const cplx* rho = s.data.data() + offset_[n];
    cplx* dst = out.data.data() + offset_[n];
    // Blocks that are exactly zero have no own dynamics.
    bool empty = true;
    for (Eigen::Index i = 0; i < d * d && empty; ++i) empty = rho[i] == cplx(0.0);
    if (empty) {
      std::fill(dst, dst + d * d, cplx(0.0));
      continue;
    }

    const cplx* k = nullptr;
    if (n > 0) {
      const auto dl = static_cast<Eigen::Index>(states_[n - 1].size());
      const Links& up = up_[n - 1];
      const Links& down = down_[n];
      x_buf.resize(static_cast<std::size_t>(dl * d));
      k_buf.resize(static_cast<std::size_t>(d * d));
      cplx* x = x_buf.data();
      cplx* kr = k_buf.data();
      // X = L rho and K rho = L^+ X, in column strips that stay cache resident.
      for (Eigen::Index c0 = 0; c0 < d; c0 += kStrip) {
        const Eigen::Index w = std::min(kStrip, d - c0);
        for (Eigen::Index u = 0; u < dl; ++u) {
          gather_rows(x + u * d + c0, rho + c0, d, up.index.data() + up.start[u], up.start[u + 1] - up.start[u], w);
        }
        for (Eigen::Index r = 0; r < d; ++r) {
          gather_rows(kr + r * d + c0, x + c0, d, down.index.data() + down.start[r], down.start[r + 1] - down.start[r],
                      w);
        }
      }
      k = kr;

      // L rho L^+ = L X^+ lands in block n-1. Row v of X L^+ is gathered
      // from row v of X; only u <= v is formed and the rest mirrored, which
      // keeps the state exactly Hermitian.
      if (feed != 0.0) {
        cplx* lower = out.data.data() + offset_[n - 1];
        const std::uint32_t* idx = up.index.data();
        const std::uint32_t* start = up.start.data();
        for (Eigen::Index v = 0; v < dl; ++v) {
          const cplx* xv = x + v * d;
          for (Eigen::Index u = 0; u <= v; ++u) {
            double re = 0.0, im = 0.0;
            for (std::uint32_t a = start[u]; a < start[u + 1]; ++a) {
              re += xv[idx[a]].real();
              im += xv[idx[a]].imag();
            }
            // (X L^+)[v, u] = conj(f[u, v])
            if (u == v) {
              lower[v * dl + v] += feed * re;
            } else {
              lower[v * dl + u] += cplx(feed * re, feed * im);
              lower[u * dl + v] += cplx(feed * re, -feed * im);
            }
          }
        }
      }
    }

    // dst = G + G^+ with G = -(rate + i c) K rho - i E rho, in tiles so the
    // transposed reads stay in cache. Written out to avoid the checked
    // complex multiply.
    const double* e = energy_[n].data();
    auto gen = [&](Eigen::Index r, Eigen::Index c, double& re, double& im) {
      const cplx p = rho[r * d + c];
      re = e[r] * p.imag();
      im = -e[r] * p.real();
      if (k) {
        const cplx q = k[r * d + c];
        re += -damp_re * q.real() + damp_im * q.imag();
        im += -damp_re * q.imag() - damp_im * q.real();
      }
    };
    for (Eigen::Index r0 = 0; r0 < d; r0 += kTile) {
      for (Eigen::Index c0 = r0; c0 < d; c0 += kTile) {
        const Eigen::Index r1 = std::min(d, r0 + kTile), c1 = std::min(d, c0 + kTile);
        for (Eigen::Index r = r0; r < r1; ++r) {
          for (Eigen::Index c = std::max(c0, r); c < c1; ++c) {
            double a_re, a_im, b_re, b_im;
            gen(r, c, a_re, a_im);
            gen(c, r, b_re, b_im);
            const cplx v(a_re + b_re, a_im - b_im);
            dst[r * d + c] = v;
            dst[c * d + r] = std::conj(v);
          }
        }
      }
    }
  }
}

double CollectiveDecaySolver::trace(const BlockState& s) const {
  double t = 0.0;
  for (int n = 0; n <= n_; ++n) t += block(s, n).trace().real();
  return t;
}

std::vector<double> CollectiveDecaySolver::populations(const BlockState& s) const {
  std::vector<double> p(n_ + 1);
  for (int n = 0; n <= n_; ++n) p[n] = block(s, n).trace().real();
  return p;
}

double CollectiveDecaySolver::excited_count(const BlockState& s) const {
  double m = 0.0;
  for (int n = 1; n <= n_; ++n) m += n * block(s, n).trace().real();
  return m;
}

double CollectiveDecaySolver::jpjm(const BlockState& s) const {
  // Tr(J- rho J+) = sum over u in block n-1 of sum_{r, r' in up(u)} rho_n[r, r'].
  std::complex<double> sum = 0.0;
  for (int n = 1; n <= n_; ++n) {
    const auto rho = block(s, n);
    const Links& up = up_[n - 1];
    for (std::size_t u = 0; u + 1 < up.start.size(); ++u) {
      for (std::uint32_t a = up.start[u]; a < up.start[u + 1]; ++a) {
        for (std::uint32_t b = up.start[u]; b < up.start[u + 1]; ++b) sum += rho(up.index[a], up.index[b]);
      }
    }
  }
  return sum.real();
}

double CollectiveDecaySolver::hermiticity_error(const BlockState& s) const {
  double err = 0.0;
  for (int n = 0; n <= n_; ++n) {
    const auto d = static_cast<Eigen::Index>(states_[n].size());
    const std::complex<double>* b = s.data.data() + offset_[n];
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = r; c < d; ++c) err = std::max(err, std::abs(b[r * d + c] - std::conj(b[c * d + r])));
    }
  }
  return err;
}

double CollectiveDecaySolver::bound(const BlockState& s) const {
  double b = 0.0;
  for (int n = 1; n <= n_; ++n) b += bound_weight_[n] * block(s, n).trace().real();
  return b;
}

DecayResult CollectiveDecaySolver::run(const BlockState& initial, const DecayOptions& options) const {
  if (initial.data.size() != static_cast<Eigen::Index>(state_size())) {
    throw DomainError("initial state does not match the solver size");
  }
  if (!(options.t1 > 0.0) || !std::isfinite(options.t1)) throw DomainError("decay window must be finite and > 0");
  if (options.samples < 2) throw DomainError("need at least two sample times");
  if (!(options.max_step > 0.0)) throw DomainError("max_step must be > 0");

  const double interval = options.t1 / (options.samples - 1);
  const long last = options.samples - 1;
  const double trace0 = trace(initial);
  double max_step = options.max_step;

  for (int attempt = 0;; ++attempt) {
    // Either several steps per sample interval, or one step spanning several
    // intervals with the samples in between taken from a cubic Hermite
    // interpolant of the observables.
    const long per = std::max<long>(1, static_cast<long>(std::floor(max_step / interval * (1.0 + 1e-9))));
    const long sub = per > 1 ? 1 : std::max<long>(1, static_cast<long>(std::ceil(interval / max_step - 1e-9)));
    const double h = per > 1 ? per * interval : interval / static_cast<double>(sub);

    DecayResult result;
    result.step = h;
    for (const char* name : {"jpjm", "excited_count", "trace"}) result.series.add_channel(name);

    BlockState s = initial;
    BlockState k1, k2, k3, k4, tmp;
    bool drifted = false;
    std::ostringstream why;

    auto sample_time = [&](long i) { return i == last ? options.t1 : interval * static_cast<double>(i); };
    auto push = [&](double t, double jj, double count, double tr) {
      result.series.times.push_back(t);
      result.series.values[0].push_back(jj);
      result.series.values[1].push_back(count);
      result.series.values[2].push_back(tr);
      if (result.series.times.size() == 1 || jj > result.max_jpjm) {
        result.max_jpjm = jj;
        result.t_max = t;
      }
    };
    auto check = [&](double t) {
      const double trace_drift = std::abs(trace(s) - trace0);
      const double herm = hermiticity_error(s);
      result.max_trace_drift = std::max(result.max_trace_drift, trace_drift);
      result.max_hermiticity_drift = std::max(result.max_hermiticity_drift, herm);
      if (!(trace_drift <= options.trace_tolerance && herm <= options.hermiticity_tolerance)) {
        drifted = true;
        why << "at t = " << t << " ns: trace drift " << trace_drift << ", hermiticity drift " << herm
            << " with step " << h << " ns";
      }
    };
    // k1 holds rhs(s) on entry; s advances by dt.
    auto rk4 = [&](double dt) {
      tmp.data = s.data + (0.5 * dt) * k1.data;
      rhs(tmp, k2);
      tmp.data = s.data + (0.5 * dt) * k2.data;
      rhs(tmp, k3);
      tmp.data = s.data + dt * k3.data;
      rhs(tmp, k4);
      s.data += (dt / 6.0) * (k1.data + 2.0 * k2.data + 2.0 * k3.data + k4.data);
      ++result.steps;
    };

    push(0.0, jpjm(s), excited_count(s), trace(s));
    check(0.0);
    long i = 0;
    if (per == 1) {
      while (i < last && !drifted) {
        if (options.stop_when_max_resolved && bound(s) <= result.max_jpjm) {
          result.stopped_early = true;
          break;
        }
        for (long k = 0; k < sub; ++k) {
          rhs(s, k1);
          rk4(h);
        }
        ++i;
        const double t = sample_time(i);
        push(t, jpjm(s), excited_count(s), trace(s));
        check(t);
      }
    } else {
      rhs(s, k1);
      std::array<double, 3> y0{jpjm(s), excited_count(s), trace(s)};
      std::array<double, 3> dy0{jpjm(k1), excited_count(k1), trace(k1)};
      while (i < last && !drifted) {
        if (options.stop_when_max_resolved && bound(s) <= result.max_jpjm) {
          result.stopped_early = true;
          break;
        }
        const long m = std::min(per, last - i);
        const double dt = interval * static_cast<double>(m);
        rk4(dt);
        rhs(s, k1);
        const std::array<double, 3> y1{jpjm(s), excited_count(s), trace(s)};
        const std::array<double, 3> dy1{jpjm(k1), excited_count(k1), trace(k1)};
        for (long j = 1; j < m; ++j) {
          const double x = static_cast<double>(j) / static_cast<double>(m);
          const double h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x), h10 = x * (1.0 - x) * (1.0 - x);
          const double h01 = x * x * (3.0 - 2.0 * x), h11 = x * x * (x - 1.0);
          std::array<double, 3> v{};
          for (int c = 0; c < 3; ++c) v[c] = h00 * y0[c] + h10 * dt * dy0[c] + h01 * y1[c] + h11 * dt * dy1[c];
          push(sample_time(i + j), v[0], v[1], v[2]);
        }
        i += m;
        push(sample_time(i), y1[0], y1[1], y1[2]);
        check(sample_time(i));
        y0 = y1;
        dy0 = dy1;
      }
    }

    if (!drifted) {
      result.final_state = std::move(s);
      return result;
    }
    if (attempt >= options.max_halvings) {
      throw NumericalError("integration drift " + why.str() + " after " + std::to_string(attempt) +
                           " step halvings");
    }
    max_step = h / 2.0;
  }
}

}  // namespace fluxsr::dynamics
