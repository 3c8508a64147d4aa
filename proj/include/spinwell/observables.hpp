#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "spinwell/fock.hpp"

namespace spinwell {

using StateVector = Eigen::VectorXcd;

struct PopulationReport {
  double n_eL = 0, n_gL = 0, n_eR = 0, n_gR = 0;
  double diff_e = 0;      // <n_eL - n_eR>
  double diff_g = 0;      // <n_gL - n_gR>
  double diff_total = 0;  // <n_eL + n_gL - n_eR - n_gR>
};

struct SpinReport {
  double Sx = 0, Sy = 0, Sz = 0;
  double varSz = 0;
  // N varSz / Sx^2; NaN when the mean spin vanishes. Numerator and
  // denominator stay available above so variants can be recomputed.
  double xi2_zx = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_dim(const StateVector& psi, const Basis& basis,
                      const char* who) {
  if (psi.size() != static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace detail

// Mode-occupation expectations; diagonal in the Fock basis.
inline PopulationReport populations(const StateVector& psi,
                                    const Basis& basis) {
  detail::check_dim(psi, basis, "populations");
  PopulationReport r;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double w = std::norm(psi[static_cast<Eigen::Index>(i)]);
    const FockState& s = basis.state(i);
    r.n_eL += w * s[Mode::eL];
    r.n_gL += w * s[Mode::gL];
    r.n_eR += w * s[Mode::eR];
    r.n_gR += w * s[Mode::gR];
  }
  r.diff_e = r.n_eL - r.n_eR;
  r.diff_g = r.n_gL - r.n_gR;
  r.diff_total = r.diff_e + r.diff_g;
  return r;
}

// Inter-well collective spin,
//   S_x = (e†_L e_R + g†_L g_R + h.c.)/2
//   S_y = (e†_L e_R + g†_L g_R - h.c.)/2i
//   S_z = (n_eL + n_gL - n_eR - n_gR)/2,
// the z component being half the total left-right population difference.
inline StateVector apply_sx(const StateVector& psi, const Basis& basis) {
  detail::check_dim(psi, basis, "apply_sx");
  StateVector out = StateVector::Zero(psi.size());
  const std::array<std::pair<Mode, Mode>, 4> pairs = {
      std::pair{Mode::eR, Mode::eL}, std::pair{Mode::eL, Mode::eR},
      std::pair{Mode::gR, Mode::gL}, std::pair{Mode::gL, Mode::gR}};
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto c = psi[static_cast<Eigen::Index>(i)];
    if (c == std::complex<double>(0.0)) continue;
    for (auto [src, dst] : pairs)
      if (auto h = hop_element(basis.state(i), src, dst))
        out[static_cast<Eigen::Index>(basis.rank(h->state))] +=
            0.5 * h->amplitude * c;
  }
  return out;
}

inline StateVector apply_sy(const StateVector& psi, const Basis& basis) {
  detail::check_dim(psi, basis, "apply_sy");
  StateVector out = StateVector::Zero(psi.size());
  const std::complex<double> half_over_i(0.0, -0.5);  // 1/(2i)
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto c = psi[static_cast<Eigen::Index>(i)];
    if (c == std::complex<double>(0.0)) continue;
    const FockState& s = basis.state(i);
    for (auto [src, dst] : {std::pair{Mode::eR, Mode::eL},
                            std::pair{Mode::gR, Mode::gL}})
      if (auto h = hop_element(s, src, dst))
        out[static_cast<Eigen::Index>(basis.rank(h->state))] +=
            half_over_i * h->amplitude * c;
    for (auto [src, dst] : {std::pair{Mode::eL, Mode::eR},
                            std::pair{Mode::gL, Mode::gR}})
      if (auto h = hop_element(s, src, dst))
        out[static_cast<Eigen::Index>(basis.rank(h->state))] -=
            half_over_i * h->amplitude * c;
  }
  return out;
}

inline StateVector apply_sz(const StateVector& psi, const Basis& basis) {
  detail::check_dim(psi, basis, "apply_sz");
  StateVector out(psi.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const FockState& s = basis.state(i);
    out[static_cast<Eigen::Index>(i)] =
        0.5 * (s.left() - s.right()) * psi[static_cast<Eigen::Index>(i)];
  }
  return out;
}

inline SpinReport collective_spin(const StateVector& psi, const Basis& basis) {
  detail::check_dim(psi, basis, "collective_spin");
  SpinReport r;
  r.Sx = std::real(psi.dot(apply_sx(psi, basis)));
  r.Sy = std::real(psi.dot(apply_sy(psi, basis)));
  const StateVector szpsi = apply_sz(psi, basis);
  r.Sz = std::real(psi.dot(szpsi));
  r.varSz = std::max(szpsi.squaredNorm() - r.Sz * r.Sz, 0.0);
  if (std::abs(r.Sx) >= 1e-12)
    r.xi2_zx = basis.atoms() * r.varSz / (r.Sx * r.Sx);
  return r;
}

// xi^2 = N var(S_z) / <S_x>^2; below one certifies squeezing.
inline double squeezing_xi2(const StateVector& psi, const Basis& basis) {
  const SpinReport r = collective_spin(psi, basis);
  if (std::abs(r.Sx) < 1e-12)
    throw std::invalid_argument(
        "squeezing_xi2: squeezing undefined, vanishing mean spin");
  return basis.atoms() * r.varSz / (r.Sx * r.Sx);
}

using Axis = Eigen::Vector3d;

// General-axis form xi^2 = N var(S_n1) / (<S_n2>^2 + <S_n3>^2) for an
// orthonormal axis triple.
inline double squeezing_general(const StateVector& psi, const Basis& basis,
                                const Axis& n1, const Axis& n2,
                                const Axis& n3) {
  constexpr double tol = 1e-12;
  if (std::abs(n1.norm() - 1) > tol || std::abs(n2.norm() - 1) > tol ||
      std::abs(n3.norm() - 1) > tol || std::abs(n1.dot(n2)) > tol ||
      std::abs(n1.dot(n3)) > tol || std::abs(n2.dot(n3)) > tol)
    throw std::invalid_argument("squeezing_general: axes not orthonormal");
  const StateVector sx = apply_sx(psi, basis);
  const StateVector sy = apply_sy(psi, basis);
  const StateVector sz = apply_sz(psi, basis);
  const auto along = [&](const Axis& n) -> StateVector {
    return n[0] * sx + n[1] * sy + n[2] * sz;
  };
  const StateVector s1 = along(n1);
  const double m1 = std::real(psi.dot(s1));
  const double var1 = std::max(s1.squaredNorm() - m1 * m1, 0.0);
  const double m2 = std::real(psi.dot(along(n2)));
  const double m3 = std::real(psi.dot(along(n3)));
  const double denom = m2 * m2 + m3 * m3;
  if (denom < 1e-24)
    throw std::invalid_argument(
        "squeezing_general: vanishing mean spin in the (n2, n3) plane");
  return basis.atoms() * var1 / denom;
}

}  // namespace spinwell
