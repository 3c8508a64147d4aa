#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinwell {

// Rotation angle that removes the Delta sin(t) + 2 Omega cos(t) cross term
// when dressing the driven well. The atan2 branch makes theta -> 0
// continuously as Omega -> 0+.
inline double rotation_angle(double Delta, double Omega) {
  if (Delta == 0.0 && Omega == 0.0)
    throw std::invalid_argument("rotation_angle: underdetermined rotation");
  return std::atan2(-2.0 * Omega, Delta);
}

// Ground energy of the sector with N/2 + n atoms in the driven (left) well
// and N/2 - n in the other, in the strong-interaction (negligible-J) limit:
//
//   E = -Delta (N/2 - n)/2 - sqrt(Delta^2 + 4 Omega^2) (N/2 + n)/2
//       + 2 U n^2 + U N^2/2 + Delta N/2.
inline double sector_energy(int n, int N, double U, double Delta,
                            double Omega) {
  if (N < 0 || N % 2 != 0)
    throw std::invalid_argument("sector_energy: N must be even");
  if (std::abs(n) > N / 2)
    throw std::invalid_argument("sector_energy: |n| exceeds N/2");
  const double root = std::sqrt(Delta * Delta + 4.0 * Omega * Omega);
  return -Delta * (N / 2.0 - n) / 2.0 - root * (N / 2.0 + n) / 2.0 +
         2.0 * U * n * n + U * N * N / 2.0 + Delta * N / 2.0;
}

struct SectorEnergy {
  int n;          // imbalance: N/2 + n atoms sit in the driven well
  double energy;  // sector ground energy
};

// E_n for every admissible imbalance -N/2 <= n <= N/2.
inline std::vector<SectorEnergy> sector_energies(int N, double U, double Delta,
                                                 double Omega) {
  std::vector<SectorEnergy> out;
  out.reserve(static_cast<std::size_t>(N) + 1);
  for (int n = -N / 2; n <= N / 2; ++n)
    out.push_back({n, sector_energy(n, N, U, Delta, Omega)});
  return out;
}

// Coupling strength at which the sector energies E_n and E_{n-1} cross and a
// single atom tunnels:  Omega_n = sqrt([4U(2n-1) + Delta]^2 - Delta^2) / 2.
inline double tunneling_threshold(int n, double U, double Delta) {
  if (n < 1) throw std::invalid_argument("tunneling_threshold: n must be >= 1");
  const double a = 4.0 * U * (2 * n - 1) + Delta;
  const double radicand = a * a - Delta * Delta;
  if (radicand < 0.0)
    throw std::invalid_argument(
        "tunneling_threshold: no real threshold for these parameters");
  return 0.5 * std::sqrt(radicand);
}

// omega0 = sqrt(8 V_b / (m x0^2)) for barrier height V_b, atom mass m and
// half-separation x0.
inline double effective_trap_frequency(double V_b, double mass, double x0) {
  if (!(V_b > 0.0) || !(mass > 0.0) || !(x0 > 0.0))
    throw std::invalid_argument(
        "effective_trap_frequency: inputs must be positive");
  return std::sqrt(8.0 * V_b / (mass * x0 * x0));
}

// Three-level (g, e, upper r) couplings after moving to the rotating frame:
// Delta_r and Delta_e are the frame detunings, Omega_g and Omega_e the (real)
// laser couplings of g and e to r.
struct ThreeLevelParams {
  double Omega_g = 0.0;
  double Omega_e = 0.0;
  double Delta_r = 0.0;
  double Delta_e = 0.0;
};

struct EffectiveTwoLevel {
  double stark_g;    // -Omega_g^2 / Delta_r
  double stark_e;    // Delta_e - Omega_e^2 / Delta_r
  double Omega_eff;  // -Omega_e Omega_g / Delta_r
};

// Adiabatic elimination of the far-detuned upper state. Valid when
// |Delta_r| >> max(|Omega_g|, |Omega_e|); callers may consult
// elimination_regime_ok for the 10x rule of thumb.
inline EffectiveTwoLevel adiabatic_elimination(const ThreeLevelParams& p) {
  if (p.Delta_r == 0.0)
    throw std::invalid_argument("adiabatic_elimination: Delta_r is zero");
  return {-p.Omega_g * p.Omega_g / p.Delta_r,
          p.Delta_e - p.Omega_e * p.Omega_e / p.Delta_r,
          -p.Omega_e * p.Omega_g / p.Delta_r};
}

inline bool elimination_regime_ok(const ThreeLevelParams& p,
                                  double factor = 10.0) {
  return std::abs(p.Delta_r) >
         factor * std::max(std::abs(p.Omega_g), std::abs(p.Omega_e));
}

}  // namespace spinwell
