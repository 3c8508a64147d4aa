#pragma once

#include <Eigen/SparseCore>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinwell/fock.hpp"

namespace spinwell {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Couplings of the total Hamiltonian
//
//   H = -J (e†_L e_R + e†_R e_L + g†_L g_R + g†_R g_L)
//       + U [(n_eL + n_gL)^2 + (n_eR + n_gR)^2]
//       + Delta (n_eL + n_eR)
//       + Omega (e†_L g_L + g†_L e_L)
//       + OmegaPrime (e†_R g_R + g†_R e_R)
//
// with hbar = 1. Energies are conventionally expressed in units of J (J = 1).
struct ModelParams {
  int N = 0;
  double J = 1.0;
  double U = 0.0;
  double Delta = 0.0;
  double Omega = 0.0;
  double OmegaPrime = 0.0;

  void validate() const {
    if (N < 0) throw std::invalid_argument("ModelParams: N < 0");
    if (!(J > 0.0)) throw std::invalid_argument("ModelParams: J must be > 0");
    if (U < 0.0) throw std::invalid_argument("ModelParams: U must be >= 0");
    if (Omega < 0.0)
      throw std::invalid_argument("ModelParams: Omega must be >= 0");
    if (OmegaPrime < 0.0)
      throw std::invalid_argument("ModelParams: OmegaPrime must be >= 0");
  }
};

// Coefficient-separable storage: each coupling's operator is assembled once,
// so H(Omega, Omega') at new parameter values is a weighted sum and never a
// structural reassembly. All terms are real symmetric; h_U and h_Delta are
// diagonal.
struct SparseHermitian {
  Eigen::Index dim = 0;
  SpMat h_J;           // -(e†_L e_R + e†_R e_L + g†_L g_R + g†_R g_L)
  SpMat h_U;           // diag[(n_eL+n_gL)^2 + (n_eR+n_gR)^2]
  SpMat h_Delta;       // diag[n_eL + n_eR]
  SpMat h_Omega;       // e†_L g_L + g†_L e_L
  SpMat h_OmegaPrime;  // e†_R g_R + g†_R e_R
};

namespace detail {

// Gathers coordinate entries of Σ a†_dst a_src over the given mode pairs
// (plus Hermitian conjugates) scaled by `sign`.
inline SpMat hopping_term(const Basis& basis,
                          const std::vector<std::pair<Mode, Mode>>& pairs,
                          double sign) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.size() * pairs.size() * 2);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const FockState& s = basis.state(i);
    for (auto [src, dst] : pairs) {
      if (auto h = hop_element(s, src, dst)) {
        const std::size_t j = basis.rank(h->state);
        trip.emplace_back(static_cast<int>(j), static_cast<int>(i),
                          sign * h->amplitude);
      }
    }
  }
  SpMat m(static_cast<Eigen::Index>(basis.size()),
          static_cast<Eigen::Index>(basis.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

inline SpMat diagonal_term(const Basis& basis, double (*f)(const FockState&)) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double v = f(basis.state(i));
    if (v != 0.0)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), v);
  }
  SpMat m(static_cast<Eigen::Index>(basis.size()),
          static_cast<Eigen::Index>(basis.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

}  // namespace detail

inline SparseHermitian assemble(const Basis& basis) {
  SparseHermitian h;
  h.dim = static_cast<Eigen::Index>(basis.size());
  h.h_J = detail::hopping_term(
      basis,
      {{Mode::eR, Mode::eL}, {Mode::eL, Mode::eR},
       {Mode::gR, Mode::gL}, {Mode::gL, Mode::gR}},
      -1.0);
  h.h_U = detail::diagonal_term(basis, [](const FockState& s) {
    const double nl = s.left(), nr = s.right();
    return nl * nl + nr * nr;
  });
  h.h_Delta = detail::diagonal_term(
      basis, [](const FockState& s) { return double(s.excited()); });
  h.h_Omega = detail::hopping_term(
      basis, {{Mode::gL, Mode::eL}, {Mode::eL, Mode::gL}}, 1.0);
  h.h_OmegaPrime = detail::hopping_term(
      basis, {{Mode::gR, Mode::eR}, {Mode::eR, Mode::gR}}, 1.0);
  return h;
}

// J h_J + U h_U + Delta h_Delta + Omega h_Omega + Omega' h_OmegaPrime
inline SpMat evaluate(const SparseHermitian& h, const ModelParams& p) {
  if (h.dim != binomial(p.N + 3, 3))
    throw std::invalid_argument(
        "evaluate: operator dimension " + std::to_string(h.dim) +
        " does not match N = " + std::to_string(p.N));
  SpMat m = p.J * h.h_J;
  m += p.U * h.h_U;
  m += p.Delta * h.h_Delta;
  m += p.Omega * h.h_Omega;
  m += p.OmegaPrime * h.h_OmegaPrime;
  // drop structural zeros from vanishing coefficients so the sparsity
  // pattern reflects the actual operator (block structure checks rely on it)
  m.prune([](const Eigen::Index&, const Eigen::Index&, const double& v) {
    return v != 0.0;
  });
  m.makeCompressed();
  return m;
}

struct TwoModeValidity {
  double ratio;  // U N / omega0
  bool valid;
};

// Two-mode truncation holds when the trap energy dominates the interaction
// energy, omega0 >> U N. The default acceptance threshold is ratio < 0.1.
inline TwoModeValidity two_mode_validity(double omega0, double U, int N,
                                         double threshold = 0.1) {
  if (!(omega0 > 0.0))
    throw std::invalid_argument("two_mode_validity: omega0 must be > 0");
  const double ratio = U * static_cast<double>(N) / omega0;
  return {ratio, ratio < threshold};
}

}  // namespace spinwell
