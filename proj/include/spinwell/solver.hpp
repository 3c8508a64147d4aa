#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinwell/model.hpp"

namespace spinwell {

// Numerical failure distinct from bad input; carries diagnostics in the
// message and maps to a dedicated CLI exit code.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundSolution {
  double energy = 0.0;
  Eigen::VectorXcd vector;  // normalized, largest-|amplitude| entry real > 0
  double gap = 0.0;         // E1 - E0 (0 when dim == 1)
  bool degenerate = false;
};

struct SolverOptions {
  Eigen::Index dense_threshold = 2000;  // dense below, Lanczos above
  double residual_tol = 1e-11;          // relative to max row 1-norm
  int max_iterations = 10000;           // Lanczos matvec cap
};

namespace detail {

inline double max_abs_diagonal(const SpMat& m) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    d = std::max(d, std::abs(m.coeff(i, i)));
  return d;
}

inline double max_row_norm(const SpMat& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    double r = 0.0;
    for (SpMat::InnerIterator it(m, i); it; ++it) r += std::abs(it.value());
    best = std::max(best, r);
  }
  return best;
}

// Deterministic global phase: rotate so the largest-|amplitude| component is
// real positive. Real vectors just flip sign.
inline void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  const std::complex<double> phase = v[imax] / best;
  v /= phase;
}

inline void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

}  // namespace detail

// Lowest eigenpair by full diagonalization. Exposed separately so the dense
// and iterative routes can cross-validate each other.
inline GroundSolution ground_state_dense(const SpMat& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("ground_state_dense: bad dimension");
  Eigen::MatrixXd dense(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success)
    throw NumericalError("ground_state_dense: eigensolver failed");
  GroundSolution g;
  g.energy = es.eigenvalues()[0];
  Eigen::VectorXd v = es.eigenvectors().col(0);
  detail::fix_sign(v);
  g.vector = v.cast<std::complex<double>>();
  g.gap = h.rows() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : 0.0;
  const double scale = detail::max_row_norm(h);
  const double tol = std::max(1e-9 * detail::max_abs_diagonal(h),
                              1e-12 * std::max(scale, 1.0));
  g.degenerate = h.rows() > 1 && g.gap < tol;
  return g;
}

// Lowest eigenpair by Lanczos with full reorthogonalization. The start vector
// is the deterministic uniform vector (1,...,1)/sqrt(dim), so repeated runs
// are bit-for-bit identical. Restarts from the current Ritz vector until the
// residual bound is met. An exact degeneracy whose second copy lies outside
// the Krylov space of that start vector is invisible here; the dense route is
// authoritative for the degenerate flag.
inline GroundSolution ground_state_lanczos(const SpMat& h,
                                           const SolverOptions& opt = {}) {
  const Eigen::Index n = h.rows();
  if (n != h.cols() || n == 0)
    throw std::invalid_argument("ground_state_lanczos: bad dimension");
  const double scale = std::max(detail::max_row_norm(h), 1.0);
  const double target = opt.residual_tol * scale;

  Eigen::VectorXd q = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  const int block = static_cast<int>(std::min<Eigen::Index>(n, 250));
  int used = 0;
  double energy = 0.0, gap = 0.0, residual = 0.0;
  Eigen::VectorXd ground = q;

  while (true) {
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(block);
    Eigen::VectorXd alpha(block), beta(block);
    Eigen::VectorXd v = q;
    v.normalize();
    basis.push_back(v);
    int m = 0;
    for (int j = 0; j < block; ++j) {
      Eigen::VectorXd w = h * basis[j];
      ++used;
      alpha[j] = basis[j].dot(w);
      w -= alpha[j] * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (const auto& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
      beta[j] = w.norm();
      m = j + 1;
      if (beta[j] < 1e-14 * scale || m == block ||
          static_cast<Eigen::Index>(m) == n)
        break;
      basis.push_back(w / beta[j]);
    }

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    energy = es.eigenvalues()[0];
    gap = m > 1 ? es.eigenvalues()[1] - energy : 0.0;
    ground.setZero(n);
    for (int j = 0; j < m; ++j)
      ground += es.eigenvectors()(j, 0) * basis[j];
    ground.normalize();
    residual = (h * ground - energy * ground).norm();
    if (residual <= target) break;
    if (used >= opt.max_iterations)
      throw NumericalError(
          "ground_state_lanczos: no convergence after " +
          std::to_string(used) + " iterations, residual " +
          std::to_string(residual) + " > " + std::to_string(target));
    q = ground;  // restart
  }

  GroundSolution g;
  g.energy = energy;
  detail::fix_sign(ground);
  g.vector = ground.cast<std::complex<double>>();
  g.gap = std::max(gap, 0.0);
  const double tol = std::max(1e-9 * detail::max_abs_diagonal(h),
                              1e-12 * scale);
  g.degenerate = n > 1 && g.gap < tol;
  return g;
}

// Route by dimension: dense up to opt.dense_threshold, Lanczos above. The
// residual bound || H v - E0 v || <= residual_tol * scale is asserted on every
// accepted result.
inline GroundSolution ground_state(const SpMat& h,
                                   const SolverOptions& opt = {}) {
  GroundSolution g = h.rows() <= opt.dense_threshold
                         ? ground_state_dense(h)
                         : ground_state_lanczos(h, opt);
  const double scale = std::max(detail::max_row_norm(h), 1.0);
  const double res = (h * g.vector.real() - g.energy * g.vector.real()).norm();
  if (res > 1e-9 * scale)
    throw NumericalError("ground_state: residual " + std::to_string(res) +
                         " exceeds bound " + std::to_string(1e-9 * scale));
  return g;
}

}  // namespace spinwell
