#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinwell/analytic.hpp"
#include "spinwell/model.hpp"
#include "spinwell/observables.hpp"
#include "spinwell/solver.hpp"

namespace spinwell {

// Linear ramp Omega(t) = v t, Omega'(t) = v' t. No other schedules.
struct RampProtocol {
  double v = 0.0;
  double v_prime = 0.0;
  double t_final = 0.0;
  double dt = 1e-3;

  void validate() const {
    if (v < 0.0 || v_prime < 0.0)
      throw std::invalid_argument("RampProtocol: ramp rates must be >= 0");
    if (!(dt > 0.0) || !(t_final > 0.0) || dt > t_final)
      throw std::invalid_argument("RampProtocol: need 0 < dt <= t_final");
  }
};

struct TrajectorySample {
  double t = 0;
  double omega = 0;
  double omega_prime = 0;
  double n_eL = 0, n_gL = 0, n_eR = 0, n_gR = 0;
  double diff_e = 0, diff_g = 0, diff_total = 0;
  double norm = 1;
  double xi2 = std::numeric_limits<double>::quiet_NaN();
  double fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<StateVector> states;  // aligned with samples when retained
  bool states_retained = false;
};

// Ground state of the laser-free Hamiltonian (Omega = Omega' = 0). The
// detuning diagonal stays in: without it the internal states are degenerate
// at Omega = 0 and the ground state would be ambiguous.
inline StateVector initial_state(const Basis& basis, const SparseHermitian& h,
                                 const ModelParams& params,
                                 const SolverOptions& opt = {}) {
  ModelParams p = params;
  p.Omega = 0.0;
  p.OmegaPrime = 0.0;
  const GroundSolution g = ground_state(evaluate(h, p), opt);
  if (g.degenerate)
    throw NumericalError(
        "initial_state: ground state is degenerate; add an explicit "
        "symmetry-breaking term (e.g. nonzero Delta) to select one");
  return g.vector;
}

namespace detail {

// Real sparse matrix applied to complex vectors, kept in CSR arrays. The
// propagator's inner loop spends nearly all its time here.
struct RealCsr {
  Eigen::Index rows = 0;
  std::vector<Eigen::Index> offs;
  std::vector<Eigen::Index> cols;
  std::vector<double> vals;
  bool empty = true;

  static RealCsr from(const SpMat& m) {
    RealCsr c;
    c.rows = m.rows();
    c.offs.assign(static_cast<std::size_t>(m.rows()) + 1, 0);
    c.cols.reserve(static_cast<std::size_t>(m.nonZeros()));
    c.vals.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
      for (SpMat::InnerIterator it(m, i); it; ++it) {
        c.cols.push_back(it.col());
        c.vals.push_back(it.value());
      }
      c.offs[static_cast<std::size_t>(i) + 1] =
          static_cast<Eigen::Index>(c.cols.size());
    }
    c.empty = c.vals.empty();
    return c;
  }

  // y += scale * M x  for real or purely imaginary scale
  void accumulate(const std::complex<double>* x, std::complex<double>* y,
                  std::complex<double> scale) const {
    if (empty) return;
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::complex<double> acc(0.0, 0.0);
      for (Eigen::Index k = offs[static_cast<std::size_t>(i)];
           k < offs[static_cast<std::size_t>(i) + 1]; ++k)
        acc += vals[static_cast<std::size_t>(k)] *
               x[cols[static_cast<std::size_t>(k)]];
      y[i] += scale * acc;
    }
  }
};

// One step of the Lanczos exponential integrator for H(t) = A + t B over
// [t0, t0 + dt]. The generator is the midpoint Hamiltonian plus the exact
// second Magnus term for a linear ramp,
//   Theta = -i dt [ H(t0 + dt/2) + i (dt^2/12) [A, B] ],
// which is anti-Hermitian, so each step is unitary up to the Krylov
// truncation tolerance. The Krylov dimension adapts per step; a step that
// cannot converge within m_max splits in half recursively.
class KrylovRampStepper {
 public:
  KrylovRampStepper(const SpMat& a, const SpMat& b, int m_max = 72,
                    double tol = 1e-12)
      : a_(RealCsr::from(a)), m_max_(m_max), tol_(tol) {
    if (b.nonZeros() > 0) {
      b_ = RealCsr::from(b);
      const SpMat comm = (a * b - b * a).pruned(1e-14);
      comm_ = RealCsr::from(comm);
    }
    dim_ = a.rows();
    krylov_.resize(static_cast<std::size_t>(m_max_));
  }

  void step(StateVector& psi, double t0, double dt, int depth = 0) {
    if (depth > 40)
      throw NumericalError("propagate: step size underflow at t = " +
                           std::to_string(t0));
    if (!try_step(psi, t0, dt)) {
      step(psi, t0, dt / 2, depth + 1);
      step(psi, t0 + dt / 2, dt / 2, depth + 1);
    }
  }

 private:
  void apply_heff(double t_mid, double kappa, const StateVector& x,
                  StateVector& y) const {
    y.setZero();
    a_.accumulate(x.data(), y.data(), 1.0);
    b_.accumulate(x.data(), y.data(), t_mid);
    comm_.accumulate(x.data(), y.data(), std::complex<double>(0.0, kappa));
  }

  bool try_step(StateVector& psi, double t0, double dt) {
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return true;
    const double t_mid = t0 + dt / 2;
    const double kappa = dt * dt / 12.0;

    auto& v = krylov_;
    v[0] = psi / beta0;
    Eigen::VectorXd alpha(m_max_), beta(m_max_);
    StateVector w(dim_);
    Eigen::VectorXcd y;
    double err_prev = std::numeric_limits<double>::infinity();
    int m = 0;
    bool converged = false;

    for (int j = 0; j < m_max_; ++j) {
      apply_heff(t_mid, kappa, v[static_cast<std::size_t>(j)], w);
      alpha[j] = std::real(v[static_cast<std::size_t>(j)].dot(w));
      w -= alpha[j] * v[static_cast<std::size_t>(j)];
      if (j > 0) w -= beta[j - 1] * v[static_cast<std::size_t>(j - 1)];
      for (int i = 0; i <= j; ++i)
        w -= v[static_cast<std::size_t>(i)].dot(w) *
             v[static_cast<std::size_t>(i)];
      beta[j] = w.norm();
      m = j + 1;

      const bool breakdown = beta[j] < 1e-14;
      if (breakdown || j >= 2) {
        y = expm_tridiag(alpha, beta, m, dt);
        const double err = breakdown ? 0.0 : beta[j] * std::abs(y[m - 1]);
        if (std::max(err, err_prev) < tol_ || breakdown) {
          converged = true;
          break;
        }
        err_prev = err;
      }
      if (j + 1 < m_max_) v[static_cast<std::size_t>(j + 1)] = w / beta[j];
    }
    if (!converged) return false;

    psi.setZero();
    for (int j = 0; j < m; ++j)
      psi += y[j] * v[static_cast<std::size_t>(j)];
    psi *= beta0;
    return true;
  }

  // exp(-i dt T_m) e1 for the symmetric tridiagonal Lanczos matrix
  Eigen::VectorXcd expm_tridiag(const Eigen::VectorXd& alpha,
                                const Eigen::VectorXd& beta, int m,
                                double dt) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(alpha.head(m), beta.head(std::max(m - 1, 0)));
    const Eigen::MatrixXd& z = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phases(m);
    for (int k = 0; k < m; ++k)
      phases[k] = std::exp(std::complex<double>(0.0, -dt * lam[k])) * z(0, k);
    return z * phases;
  }

  RealCsr a_, b_, comm_;
  Eigen::Index dim_ = 0;
  int m_max_;
  double tol_;
  mutable std::vector<StateVector> krylov_;
};

inline TrajectorySample make_sample(const Basis& basis, const StateVector& psi,
                                    double t, const RampProtocol& proto) {
  TrajectorySample s;
  s.t = t;
  s.omega = proto.v * t;
  s.omega_prime = proto.v_prime * t;
  const PopulationReport pop = populations(psi, basis);
  s.n_eL = pop.n_eL;
  s.n_gL = pop.n_gL;
  s.n_eR = pop.n_eR;
  s.n_gR = pop.n_gR;
  s.diff_e = pop.diff_e;
  s.diff_g = pop.diff_g;
  s.diff_total = pop.diff_total;
  s.norm = psi.norm();
  try {
    s.xi2 = squeezing_xi2(psi, basis);
  } catch (const std::invalid_argument&) {
  }
  return s;
}

}  // namespace detail

// Time evolution under the ramp. params.Omega / params.OmegaPrime are
// ignored: the ramp defines Omega(t) = v t from zero. Norm drift beyond
// 1e-8 per unit Jt aborts with the offending time.
inline Trajectory propagate(const Basis& basis, const SparseHermitian& h,
                            const ModelParams& params,
                            const RampProtocol& proto, const StateVector& psi0,
                            int sample_every, bool retain_states = false) {
  proto.validate();
  if (sample_every < 1)
    throw std::invalid_argument("propagate: sample_every must be >= 1");
  if (psi0.size() != h.dim)
    throw std::invalid_argument("propagate: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("propagate: initial state not normalized");

  SpMat a = params.J * h.h_J;
  a += params.U * h.h_U;
  a += params.Delta * h.h_Delta;
  SpMat b = proto.v * h.h_Omega;
  b += proto.v_prime * h.h_OmegaPrime;
  detail::KrylovRampStepper stepper(a, b);

  const auto n_steps =
      static_cast<long>(std::ceil(proto.t_final / proto.dt - 1e-9));
  StateVector psi = psi0;
  Trajectory traj;
  traj.states_retained = retain_states;
  traj.samples.reserve(static_cast<std::size_t>(n_steps / sample_every) + 2);

  const auto record = [&](double t) {
    traj.samples.push_back(detail::make_sample(basis, psi, t, proto));
    if (retain_states) traj.states.push_back(psi);
  };

  record(0.0);
  double t = 0.0;
  for (long k = 0; k < n_steps; ++k) {
    const double t_next = std::min((k + 1) * proto.dt, proto.t_final);
    stepper.step(psi, t, t_next - t);
    t = t_next;
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > 1e-8 * std::max(t, 1.0))
      throw NumericalError("propagate: norm drift " + std::to_string(drift) +
                           " exceeds 1e-8 per unit Jt at t = " +
                           std::to_string(t));
    if ((k + 1) % sample_every == 0 || k + 1 == n_steps) record(t);
  }
  return traj;
}

// |<psi_GS(Omega(t)) | psi(t)>|^2 per retained sample; also fills the
// trajectory's fidelity fields.
inline std::vector<double> ground_fidelity(Trajectory& traj, const Basis&,
                                           const SparseHermitian& h,
                                           const ModelParams& params,
                                           const RampProtocol& proto,
                                           const SolverOptions& opt = {}) {
  if (!traj.states_retained)
    throw std::invalid_argument(
        "ground_fidelity: trajectory did not retain states");
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    ModelParams p = params;
    p.Omega = proto.v * traj.samples[i].t;
    p.OmegaPrime = proto.v_prime * traj.samples[i].t;
    const GroundSolution g = ground_state(evaluate(h, p), opt);
    const double f = std::norm(g.vector.dot(traj.states[i]));
    traj.samples[i].fidelity = f;
    out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// dt-halving convergence gate

struct ConvergenceReport {
  double max_change = 0.0;  // over all sampled observables
  bool pass = false;
};

inline double compare_observables(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument(
        "compare_observables: sample counts differ (align sample strides)");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    worst = std::max({worst, std::abs(x.diff_e - y.diff_e),
                      std::abs(x.diff_g - y.diff_g),
                      std::abs(x.diff_total - y.diff_total),
                      std::abs(x.norm - y.norm)});
    if (std::isfinite(x.xi2) && std::isfinite(y.xi2))
      worst = std::max(worst, std::abs(x.xi2 - y.xi2));
    if (std::isfinite(x.fidelity) && std::isfinite(y.fidelity))
      worst = std::max(worst, std::abs(x.fidelity - y.fidelity));
  }
  return worst;
}

// Re-runs the trajectory at dt/2 (doubled sample stride, same sample times)
// and reports the worst observable change. tol per the propagator contract.
inline ConvergenceReport dt_convergence_gate(
    const Basis& basis, const SparseHermitian& h, const ModelParams& params,
    const RampProtocol& proto, const StateVector& psi0, int sample_every,
    double tol = 1e-6) {
  const Trajectory coarse =
      propagate(basis, h, params, proto, psi0, sample_every);
  RampProtocol fine = proto;
  fine.dt = proto.dt / 2;
  const Trajectory refined =
      propagate(basis, h, params, fine, psi0, 2 * sample_every);
  ConvergenceReport rep;
  rep.max_change = compare_observables(coarse, refined);
  rep.pass = rep.max_change <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Appendix three-level system and its adiabatic-elimination check

struct ThreeLevelTrajectory {
  std::vector<double> times;
  std::vector<Eigen::Vector3cd> amplitudes;  // (c_g, c_e, c_r)
};

namespace detail {

// Classic RK4 on c' = -i H c for a small constant Hermitian matrix.
template <int Dim>
inline void rk4_series(const Eigen::Matrix<std::complex<double>, Dim, Dim>& h,
                       Eigen::Matrix<std::complex<double>, Dim, 1>& c,
                       double dt) {
  using Vec = Eigen::Matrix<std::complex<double>, Dim, 1>;
  const std::complex<double> mi(0.0, -1.0);
  const Vec k1 = mi * (h * c);
  const Vec k2 = mi * (h * (c + 0.5 * dt * k1));
  const Vec k3 = mi * (h * (c + 0.5 * dt * k2));
  const Vec k4 = mi * (h * (c + dt * k3));
  c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double three_level_default_dt(const ThreeLevelParams& p) {
  const double scale = std::abs(p.Delta_r) + std::abs(p.Delta_e) +
                       std::abs(p.Omega_g) + std::abs(p.Omega_e);
  return scale > 0.0 ? 0.005 / scale : 1e-3;
}

}  // namespace detail

// i c_g' = Omega_g c_r ; i c_e' = Delta_e c_e + Omega_e c_r ;
// i c_r' = Delta_r c_r + Omega_g c_g + Omega_e c_e.
inline ThreeLevelTrajectory three_level_evolve(const ThreeLevelParams& p,
                                               Eigen::Vector3cd c0,
                                               double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final > 0.0) || dt > t_final)
    throw std::invalid_argument("three_level_evolve: need 0 < dt <= t_final");
  if (std::abs(c0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("three_level_evolve: c0 not normalized");
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  h(0, 2) = p.Omega_g;
  h(2, 0) = p.Omega_g;
  h(1, 1) = p.Delta_e;
  h(1, 2) = p.Omega_e;
  h(2, 1) = p.Omega_e;
  h(2, 2) = p.Delta_r;

  const auto n_steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  ThreeLevelTrajectory traj;
  traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.amplitudes.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.times.push_back(0.0);
  traj.amplitudes.push_back(c0);
  double t = 0.0;
  for (long k = 0; k < n_steps; ++k) {
    const double t_next = std::min((k + 1) * dt, t_final);
    detail::rk4_series<3>(h, c0, t_next - t);
    t = t_next;
    if (std::abs(c0.norm() - 1.0) > 1e-8)
      throw NumericalError(
          "three_level_evolve: norm drift exceeds 1e-8 at t = " +
          std::to_string(t) + "; reduce dt");
    traj.times.push_back(t);
    traj.amplitudes.push_back(c0);
  }
  return traj;
}

struct EliminationReport {
  double max_population_error = 0.0;  // max_t |P_g(3-level) - P_g(2-level)|
  double coupling_ratio = 0.0;        // max(|Omega_g|, |Omega_e|) / |Delta_r|
  double threshold = 0.0;             // 5 * coupling_ratio^2
  bool pass = false;
  bool regime_ok = true;  // |Delta_r| >= 10 max coupling
  std::string warning;
};

// Integrates the full three-level system and the eliminated two-level one
// from (c_g, c_e, c_r) = (1, 0, 0) and reports the worst ground-population
// discrepancy. A violated validity precondition only attaches a warning.
inline EliminationReport validate_elimination(const ThreeLevelParams& p,
                                              double t_final, double dt = 0.0) {
  if (p.Delta_r == 0.0)
    throw std::invalid_argument("validate_elimination: Delta_r is zero");
  if (dt <= 0.0) dt = detail::three_level_default_dt(p);

  EliminationReport rep;
  const double coupling = std::max(std::abs(p.Omega_g), std::abs(p.Omega_e));
  rep.coupling_ratio = coupling / std::abs(p.Delta_r);
  rep.threshold = 5.0 * rep.coupling_ratio * rep.coupling_ratio;
  rep.regime_ok = elimination_regime_ok(p);
  if (!rep.regime_ok)
    rep.warning =
        "outside adiabatic-elimination regime: |Delta_r| < 10 max(|Omega_g|, "
        "|Omega_e|); discrepancy is expected to degrade";

  const ThreeLevelTrajectory full =
      three_level_evolve(p, Eigen::Vector3cd(1.0, 0.0, 0.0), t_final, dt);

  const EffectiveTwoLevel eff = adiabatic_elimination(p);
  Eigen::Matrix2cd h2 = Eigen::Matrix2cd::Zero();
  h2(0, 0) = eff.stark_g;
  h2(1, 1) = eff.stark_e;
  h2(0, 1) = eff.Omega_eff;
  h2(1, 0) = eff.Omega_eff;
  Eigen::Vector2cd c2(1.0, 0.0);

  rep.max_population_error = 0.0;
  double t = 0.0;
  for (std::size_t i = 1; i < full.times.size(); ++i) {
    detail::rk4_series<2>(h2, c2, full.times[i] - t);
    t = full.times[i];
    const double pg3 = std::norm(full.amplitudes[i][0]);
    const double pg2 = std::norm(c2[0]);
    rep.max_population_error =
        std::max(rep.max_population_error, std::abs(pg3 - pg2));
  }
  rep.pass = rep.max_population_error <= rep.threshold;
  return rep;
}

}  // namespace spinwell
