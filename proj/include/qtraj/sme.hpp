#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qtraj/states.hpp"

namespace qtraj {

struct ProbeConfig {
  Mat observable;          // Hermitian; site projector in all paper setups
  double strength = 0.0;   // k, in units of J
  double efficiency = 1.0; // mu; only mu = 1 is simulated
  void validate() const;
};

// Stochastic update rule for one (dt, dW) step.
//  EulerMaruyama: the plain two-term discretization. Its purity error is
//     O(sqrt(dt)) per trajectory; at k ~ J it wanders far outside [1/N, 1].
//  Milstein: adds the derivative-of-diffusion correction (strong order 1);
//     still produces occasional unphysical excursions at strong probing.
//  MeasurementOperator: rho -> M rho M^dag / tr with
//     M = 1 - (iH + k O^2) dt + sqrt(2k) O dY, dY = sqrt(8k) lambda. The
//     update is a completely positive map, so states stay positive and pure
//     states stay exactly pure; mu = 1 only. Default.
enum class StepScheme { EulerMaruyama, Milstein, MeasurementOperator };

double default_dt(double coupling, double strength);  // 0.001/max(J,k)
double dt_guard(double coupling, double strength);    // 0.01/max(J,k)

struct IntegrationConfig {
  double dt = 0.0;       // 0 -> default_dt
  double t_final = 0.0;
  std::uint64_t seed = 0;
  bool renormalize_every_step = true;
  bool allow_large_dt = false;  // explicit opt-out of the dt guard
  StepScheme scheme = StepScheme::MeasurementOperator;
  int sample_every = 0;  // diagnostic decimation; 0 -> ~1000 samples
};

struct MeasurementRecord {
  double dt = 0.0;
  std::vector<double> samples;  // raw increments lambda_i (units of time)
  double strength = 0.0;
  double efficiency = 1.0;
};

struct TrajectoryResult {
  std::vector<double> times;  // sampled diagnostic times
  MeasurementRecord record;   // full resolution
  RMat site_populations;      // n_samples x N
  std::vector<ParityWeights> parity;
  std::vector<double> purity;
  Mat final_state;
};

struct EnsembleResult {
  std::vector<TrajectoryResult> trajectories;
  std::vector<double> avg_times;
  std::vector<Mat> avg_states;  // ensemble-averaged state on the sample grid
};

// 2 O rho O^dag - {O^dag O, rho}
Mat dissipator(const Mat& o, const Mat& rho);

// O rho + rho O - <O + O^dag> rho
Mat innovation(const Mat& o, const Mat& rho);

// One stochastic step; returns (rho_next, lambda sample). The update is
// d rho = -i[H,rho] dt + k D[O] rho dt + sqrt(2 k mu) H[O] rho dW and
// lambda = <O> dt + dW/sqrt(8k); Milstein/measurement-operator variants add
// their respective dW^2 structure. Renormalization re-Hermitizes and divides
// by the trace.
std::pair<Mat, double> sme_step(const Mat& rho, const Mat& h,
                                const ProbeConfig& probe, double dt, double dW,
                                bool renormalize = true);
std::pair<Mat, double> sme_step_milstein(const Mat& rho, const Mat& h,
                                         const ProbeConfig& probe, double dt,
                                         double dW, bool renormalize = true);
std::pair<Mat, double> measurement_operator_step(const Mat& rho, const Mat& h,
                                                 const ProbeConfig& probe,
                                                 double dt, double dW,
                                                 bool renormalize = true);

TrajectoryResult simulate_trajectory(const LatticeSpec& spec, const Mat& initial,
                                     const ProbeConfig& probe,
                                     const IntegrationConfig& integ);

// Closed-system mode (no probe, no record); k = 0 with probing enabled is
// rejected because the record noise diverges.
TrajectoryResult simulate_closed(const LatticeSpec& spec, const Mat& initial,
                                 const IntegrationConfig& integ);

// Trajectory i draws from the (seed, i) stream, so results are independent
// of execution order and thread count; the average-state reduction runs in
// trajectory-index order for bit-stable output.
EnsembleResult simulate_ensemble(const LatticeSpec& spec, const Mat& initial,
                                 const ProbeConfig& probe,
                                 const IntegrationConfig& integ, int n_traj,
                                 int n_threads = 0);

// Plain-loop reference implementation; bit-identical to the parallel runner.
EnsembleResult simulate_ensemble_serial(const LatticeSpec& spec,
                                        const Mat& initial,
                                        const ProbeConfig& probe,
                                        const IntegrationConfig& integ,
                                        int n_traj);

}  // namespace qtraj
