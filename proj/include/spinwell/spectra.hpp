#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spinwell/model.hpp"
#include "spinwell/observables.hpp"
#include "spinwell/solver.hpp"

namespace spinwell {

struct SweepRow {
  double omega;
  double diff_e;
  double diff_g;
  double diff_total;
  double energy;
  double gap;
  double xi2;  // NaN where the mean spin vanishes
};

using SweepTable = std::vector<SweepRow>;

inline std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("linear_grid: step <= 0");
  if (hi < lo) throw std::invalid_argument("linear_grid: empty range");
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  g.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) g.push_back(lo + double(i) * step);
  return g;
}

// Ground-state observables per grid point. Points are independent and solved
// in parallel; rows are merged in grid order so output is deterministic.
inline SweepTable sweep_ground(const Basis& basis, const SparseHermitian& h,
                               const ModelParams& base,
                               const std::vector<double>& omegas,
                               const SolverOptions& opt = {},
                               unsigned threads = 0) {
  if (omegas.empty())
    throw std::invalid_argument("sweep_ground: empty Omega grid");
  for (std::size_t i = 1; i < omegas.size(); ++i)
    if (!(omegas[i] > omegas[i - 1]))
      throw std::invalid_argument("sweep_ground: grid must be increasing");

  SweepTable table(omegas.size());
  const auto solve_point = [&](std::size_t i) {
    ModelParams p = base;
    p.Omega = omegas[i];
    GroundSolution g;
    try {
      g = ground_state(evaluate(h, p), opt);
    } catch (const NumericalError& e) {
      throw NumericalError("sweep_ground: Omega = " +
                           std::to_string(omegas[i]) + ": " + e.what());
    }
    const PopulationReport pop = populations(g.vector, basis);
    double xi2 = std::numeric_limits<double>::quiet_NaN();
    try {
      xi2 = squeezing_xi2(g.vector, basis);
    } catch (const std::invalid_argument&) {
    }
    table[i] = SweepRow{omegas[i], pop.diff_e,    pop.diff_g, pop.diff_total,
                        g.energy,  g.gap,         xi2};
  };

  unsigned n_threads = threads ? threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, omegas.size()));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < omegas.size(); ++i) solve_point(i);
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w)
      futs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < omegas.size(); i += n_threads)
          solve_point(i);
      }));
    for (auto& f : futs) f.get();
  }
  return table;
}

struct StepCrossing {
  int n;         // crossing of diff_total through the odd integer 2n - 1
  double omega;  // interpolated location
};

// Locations where diff_total first crosses each odd integer 1, 3, ..., N-1,
// by linear interpolation between the bracketing rows. Crossings outside the
// grid range are simply absent from the result.
inline std::vector<StepCrossing> detect_steps(const SweepTable& table, int N) {
  std::vector<StepCrossing> out;
  if (table.size() < 2) return out;
  for (int n = 1; 2 * n - 1 <= N - 1; ++n) {
    const double level = 2.0 * n - 1.0;
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
      const double a = table[i].diff_total, b = table[i + 1].diff_total;
      if (a < level && b >= level) {
        const double t = (level - a) / (b - a);
        out.push_back(
            {n, table[i].omega + t * (table[i + 1].omega - table[i].omega)});
        break;
      }
    }
  }
  return out;
}

}  // namespace spinwell
