// Times the OpenMP kernels against their serial reference implementations
// and verifies that both produce bit-identical output.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "qtraj/liouville.hpp"
#include "qtraj/signal.hpp"
#include "qtraj/sme.hpp"

using namespace qtraj;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const RVec& a, const RVec& b) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

int main() {
  const int threads = omp_get_max_threads();
  std::printf("threads available: %d\n\n", threads);

  LatticeSpec spec{9, 1.0};
  ProbeConfig probe{site_projector(spec, {5}), 1.0, 1.0};
  IntegrationConfig integ;
  integ.t_final = 20.0;
  integ.seed = 2024;
  const Mat rho0 = eigenstate_density(analytic_eigensystem(spec), 1);
  const int n_traj = 32;

  auto t0 = std::chrono::steady_clock::now();
  const auto serial = simulate_ensemble_serial(spec, rho0, probe, integ, n_traj);
  const double ts = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const auto parallel = simulate_ensemble(spec, rho0, probe, integ, n_traj);
  const double tp = seconds(t0);
  bool same = true;
  for (int i = 0; i < n_traj && same; ++i)
    same = serial.trajectories[i].record.samples == parallel.trajectories[i].record.samples &&
           serial.avg_states[8] == parallel.avg_states[8];
  std::printf("ensemble      %2d traj   serial %7.2fs  omp %7.2fs  speedup %.2fx  identical: %s\n",
              n_traj, ts, tp, ts / tp, same ? "yes" : "NO");

  std::vector<MeasurementRecord> records;
  for (const auto& t : serial.trajectories) records.push_back(t.record);
  const RVec pgrid = dft_grid(integ.t_final, 5.0);
  t0 = std::chrono::steady_clock::now();
  const auto ps = average_periodograms_serial(records, pgrid);
  const double ts2 = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const auto pp = average_periodograms(records, pgrid);
  const double tp2 = seconds(t0);
  std::printf("periodograms  %2zu recs   serial %7.2fs  omp %7.2fs  speedup %.2fx  identical: %s\n",
              records.size(), ts2, tp2, ts2 / tp2, identical(ps.values, pp.values) ? "yes" : "NO");

  const auto liou = build_liouvillian(build_hamiltonian(spec), probe);
  const Mat rss = steady_state(liou, rho0);
  const RVec grid = default_omega_grid(spec, 400);
  t0 = std::chrono::steady_clock::now();
  const auto ss = steady_state_spectrum_serial(liou, probe.observable, rss, grid);
  const double ts3 = seconds(t0);
  t0 = std::chrono::steady_clock::now();
  const auto sp = steady_state_spectrum(liou, probe.observable, rss, grid);
  const double tp3 = seconds(t0);
  std::printf("resolvent     %3d omega  serial %7.2fs  omp %7.2fs  speedup %.2fx  identical: %s\n",
              static_cast<int>(grid.size()), ts3, tp3, ts3 / tp3,
              identical(ss.values, sp.values) ? "yes" : "NO");
  return 0;
}
