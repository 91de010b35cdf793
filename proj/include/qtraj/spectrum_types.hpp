#pragma once

#include <vector>

#include "qtraj/types.hpp"

namespace qtraj {

enum class SpectrumKind { Periodogram, SteadyState, Perturbative };

struct SpectrumMeta {
  double strength = 0.0;
  double efficiency = 1.0;
  double duration = 0.0;  // record length T (periodogram kind)
  int n_traj = 1;
  std::vector<int> probe_sites;
};

struct SpectrumEstimate {
  RVec omegas;  // strictly increasing
  RVec values;
  SpectrumKind kind = SpectrumKind::SteadyState;
  SpectrumMeta meta;
};

struct CorrelationEstimate {
  RVec taus;  // >= 0, increasing
  RVec values;
  RVec stderrs;  // per-lag standard error (Monte Carlo kind only)
  bool has_stderr = false;
};

}  // namespace qtraj
