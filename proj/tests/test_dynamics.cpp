#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spinwell/dynamics.hpp"

using namespace spinwell;

TEST_CASE("initial state at Omega = 0") {
  SECTION("strong interactions: all atoms in g, balanced") {
    const Basis b(8);
    const SparseHermitian h = assemble(b);
    const StateVector psi =
        initial_state(b, h, ModelParams{.N = 8, .J = 1, .U = 10, .Delta = 20});
    const auto pop = populations(psi, b);
    CHECK(pop.n_eL + pop.n_eR < 1e-8);
    CHECK(std::abs(pop.diff_total) < 1e-10);
  }
  SECTION("one atom settles into g, symmetric across wells") {
    const Basis b(1);
    const SparseHermitian h = assemble(b);
    const StateVector psi =
        initial_state(b, h, ModelParams{.N = 1, .J = 1, .Delta = 20});
    CHECK(std::norm(psi[static_cast<Eigen::Index>(
              b.rank(FockState{{0, 1, 0, 0}}))]) == Catch::Approx(0.5));
    CHECK(std::norm(psi[static_cast<Eigen::Index>(
              b.rank(FockState{{0, 0, 0, 1}}))]) == Catch::Approx(0.5));
  }
  SECTION("noninteracting atoms factorize into a binomial product state") {
    const int n = 6;
    const Basis b(n);
    const SparseHermitian h = assemble(b);
    const StateVector psi =
        initial_state(b, h, ModelParams{.N = n, .J = 1, .U = 0, .Delta = 20});
    for (int k = 0; k <= n; ++k) {
      const double expected =
          std::sqrt(double(binomial(n, k)) / std::pow(2.0, n));
      const auto idx =
          static_cast<Eigen::Index>(b.rank(FockState{{0, k, 0, n - k}}));
      CHECK(std::abs(psi[idx]) == Catch::Approx(expected).margin(1e-10));
    }
  }
  SECTION("degenerate ground state demands symmetry breaking") {
    const Basis b(1);
    const SparseHermitian h = assemble(b);
    CHECK_THROWS_AS(initial_state(b, h, ModelParams{.N = 1, .J = 1}),
                    NumericalError);
  }
}

TEST_CASE("stationary state under v = 0") {
  const Basis b(4);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 4, .J = 1, .U = 10, .Delta = 20};
  const StateVector psi0 = initial_state(b, h, p);
  const RampProtocol proto{.v = 0.0, .t_final = 2.0, .dt = 0.01};
  const Trajectory traj = propagate(b, h, p, proto, psi0, 10);
  const auto& first = traj.samples.front();
  for (const auto& s : traj.samples) {
    CHECK(std::abs(s.diff_total - first.diff_total) < 1e-8);
    CHECK(std::abs(s.diff_e - first.diff_e) < 1e-8);
    CHECK(std::abs(s.norm - 1.0) < 1e-10);
    CHECK(std::abs(s.xi2 - first.xi2) < 1e-8);
  }
}

TEST_CASE("two atoms ride a ramp through the first threshold") {
  const Basis b(2);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 2, .J = 1, .U = 10, .Delta = 20};
  const StateVector psi0 = initial_state(b, h, p);
  // two atoms lack the collective enhancement of larger N, so the ramp must
  // be slower for a comparable transfer, and the end point must clear the
  // anticrossing width around Omega_1
  const RampProtocol proto{.v = 0.5, .t_final = 76.0, .dt = 1e-3};
  Trajectory traj = propagate(b, h, p, proto, psi0, 500, true);
  CHECK(traj.samples.back().diff_total == Catch::Approx(2.0).margin(0.2));
  const auto fid = ground_fidelity(traj, b, h, p, proto);
  for (double f : fid) CHECK(f >= 0.98);
  for (const auto& s : traj.samples)
    CHECK(std::abs(s.norm - 1.0) <= 1e-8 * std::max(s.t, 1.0));
}

TEST_CASE("adiabatic limit: slow ramps track the instantaneous ground state") {
  const Basis b(4);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 4, .J = 1, .U = 10, .Delta = 20};
  const StateVector psi0 = initial_state(b, h, p);
  const double omega_end = 35.0;  // just past the first threshold
  const auto min_fidelity = [&](double v) {
    const RampProtocol proto{.v = v, .t_final = omega_end / v, .dt = 2e-3};
    Trajectory traj = propagate(b, h, p, proto, psi0, 500, true);
    double worst = 1.0;
    for (double f : ground_fidelity(traj, b, h, p, proto))
      worst = std::min(worst, f);
    return worst;
  };
  const double slow = min_fidelity(0.25);
  CHECK(slow >= 0.999);
  CHECK(min_fidelity(0.125) >= slow);  // halving v only improves tracking
}

TEST_CASE("dt-halving gate on a short ramp") {
  const Basis b(4);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 4, .J = 1, .U = 10, .Delta = 20};
  const StateVector psi0 = initial_state(b, h, p);
  const RampProtocol proto{.v = 2.5, .t_final = 4.0, .dt = 1e-3};
  const auto rep = dt_convergence_gate(b, h, p, proto, psi0, 100);
  CHECK(rep.pass);
  CHECK(rep.max_change <= 1e-6);
}

TEST_CASE("sample times align with the stride and include the endpoint") {
  const Basis b(2);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 2, .J = 1, .U = 5, .Delta = 10};
  const StateVector psi0 = initial_state(b, h, p);
  const RampProtocol proto{.v = 1.0, .t_final = 1.0, .dt = 0.01};
  const Trajectory traj = propagate(b, h, p, proto, psi0, 25);
  REQUIRE(traj.samples.size() == 5);
  CHECK(traj.samples[0].t == 0.0);
  CHECK(traj.samples[1].t == Catch::Approx(0.25));
  CHECK(traj.samples.back().t == Catch::Approx(1.0));
  CHECK(traj.samples.back().omega == Catch::Approx(1.0));
}

TEST_CASE("fidelity requires retained states") {
  const Basis b(2);
  const SparseHermitian h = assemble(b);
  const ModelParams p{.N = 2, .J = 1, .U = 5, .Delta = 10};
  const StateVector psi0 = initial_state(b, h, p);
  const RampProtocol proto{.v = 1.0, .t_final = 0.5, .dt = 0.01};
  Trajectory traj = propagate(b, h, p, proto, psi0, 10, false);
  CHECK_THROWS_AS(ground_fidelity(traj, b, h, p, proto),
                  std::invalid_argument);
}

TEST_CASE("three-level system") {
  SECTION("no couplings: populations frozen") {
    const ThreeLevelParams p{.Omega_g = 0, .Omega_e = 0, .Delta_r = 10,
                             .Delta_e = 1};
    const auto traj = three_level_evolve(
        p, Eigen::Vector3cd(std::sqrt(0.5), std::sqrt(0.5), 0.0), 5.0, 1e-3);
    for (const auto& c : traj.amplitudes) {
      CHECK(std::norm(c[0]) == Catch::Approx(0.5).margin(1e-10));
      CHECK(std::norm(c[1]) == Catch::Approx(0.5).margin(1e-10));
    }
  }
  SECTION("weak-coupling Rabi transfer at the eliminated frequency") {
    const double dr = 1.0;
    const ThreeLevelParams p{.Omega_g = 0.02, .Omega_e = 0.02, .Delta_r = dr,
                             .Delta_e = 0.0};
    const double omega_eff = std::abs(adiabatic_elimination(p).Omega_eff);
    const double half_period = std::acos(-1.0) / (2.0 * omega_eff);
    const auto traj =
        three_level_evolve(p, Eigen::Vector3cd(1.0, 0.0, 0.0),
                           1.2 * half_period,
                           detail::three_level_default_dt(p));
    // locate the first minimum of P_g
    std::size_t imin = 0;
    double pmin = 2.0;
    for (std::size_t i = 0; i < traj.amplitudes.size(); ++i) {
      const double pg = std::norm(traj.amplitudes[i][0]);
      if (pg < pmin) {
        pmin = pg;
        imin = i;
      }
    }
    CHECK(std::abs(traj.times[imin] - half_period) / half_period < 0.02);
    CHECK(pmin < 0.01);
    // perturbative bound on the upper-state population
    const double bound = 4.0 * std::pow(p.Omega_g / p.Delta_r, 2.0);
    for (const auto& c : traj.amplitudes) CHECK(std::norm(c[2]) <= bound);
    // norm conservation
    for (const auto& c : traj.amplitudes)
      CHECK(std::abs(c.norm() - 1.0) < 1e-8);
  }
}

TEST_CASE("adiabatic-elimination validation") {
  SECTION("deep regime passes the quadratic error envelope") {
    const ThreeLevelParams p{.Omega_g = 0.02, .Omega_e = 0.02, .Delta_r = 1.0,
                             .Delta_e = 0.0};
    const double t_transfer =
        std::acos(-1.0) / (2.0 * std::abs(adiabatic_elimination(p).Omega_eff));
    const auto rep = validate_elimination(p, t_transfer);
    CHECK(rep.regime_ok);
    CHECK(rep.pass);
    CHECK(rep.max_population_error <= 2e-3);
    CHECK(rep.warning.empty());
  }
  SECTION("marginal coupling flags the degraded regime") {
    const ThreeLevelParams p{.Omega_g = 0.1, .Omega_e = 0.1, .Delta_r = 1.0,
                             .Delta_e = 0.0};
    const double t_transfer =
        std::acos(-1.0) / (2.0 * std::abs(adiabatic_elimination(p).Omega_eff));
    const auto rep = validate_elimination(p, t_transfer);
    CHECK_FALSE(rep.regime_ok);
    CHECK_FALSE(rep.warning.empty());
    CHECK(rep.max_population_error >= 2e-3);  // ~(0.1)^2 scale
  }
  SECTION("no g coupling: nothing to eliminate") {
    const ThreeLevelParams p{.Omega_g = 0.0, .Omega_e = 0.05, .Delta_r = 1.0,
                             .Delta_e = 0.0};
    const auto rep = validate_elimination(p, 50.0);
    CHECK(rep.max_population_error <= 1e-8);
  }
  SECTION("zero detuning is rejected") {
    CHECK_THROWS_AS(
        validate_elimination(ThreeLevelParams{.Omega_g = 1, .Delta_r = 0}, 1.0),
        std::invalid_argument);
  }
}

TEST_CASE("protocol validation") {
  CHECK_THROWS_AS((RampProtocol{.v = -1, .t_final = 1, .dt = 0.1}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((RampProtocol{.v = 1, .t_final = 1, .dt = 2}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((RampProtocol{.v = 1, .t_final = 0, .dt = 0.1}.validate()),
                  std::invalid_argument);
}
