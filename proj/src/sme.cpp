#include "qtraj/sme.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "qtraj/rng.hpp"

namespace qtraj {

void ProbeConfig::validate() const {
  require_square(observable, "ProbeConfig");
  if (!is_hermitian(observable, 1e-12))
    throw ConfigError("probe observable must be Hermitian");
  if (!std::isfinite(strength) || strength < 0.0)
    throw ConfigError("probe strength must be finite and >= 0");
  if (!(efficiency >= 0.0 && efficiency <= 1.0))
    throw ConfigError("probe efficiency must lie in [0, 1]");
}

double default_dt(double coupling, double strength) {
  const double scale = std::max(std::abs(coupling), strength);
  return scale > 0.0 ? 1e-3 / scale : 1e-3;
}

double dt_guard(double coupling, double strength) {
  const double scale = std::max(std::abs(coupling), strength);
  return scale > 0.0 ? 1e-2 / scale : 1e-2;
}

Mat dissipator(const Mat& o, const Mat& rho) {
  require_same_dim(o, rho, "dissipator");
  const Mat oo = o.adjoint() * o;
  return 2.0 * o * rho * o.adjoint() - oo * rho - rho * oo;
}

Mat innovation(const Mat& o, const Mat& rho) {
  require_same_dim(o, rho, "innovation");
  const double avg = ((o + o.adjoint()) * rho).trace().real();
  return o * rho + rho * o - avg * rho;
}

namespace {

// Per-trajectory integrator with preallocated buffers. Site projectors are
// diagonal, and the lattice Hamiltonian is tridiagonal; both structures are
// exploited in the hot path.
class Stepper {
 public:
  Stepper(const Mat& h, const Mat& observable, double strength, double efficiency,
          StepScheme scheme, bool renormalize, double lattice_coupling, bool h_is_tridiagonal)
      : h_(h),
        k_(strength),
        mu_(efficiency),
        scheme_(scheme),
        renorm_(renormalize),
        coupling_(lattice_coupling),
        tridiag_(h_is_tridiagonal),
        n_(static_cast<int>(h.rows())) {
    if (scheme_ == StepScheme::MeasurementOperator && mu_ != 1.0)
      throw ConfigError("measurement-operator scheme requires efficiency 1");
    diag_probe_ =
        (observable - Mat(observable.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    o_ = observable;
    o2_ = observable * observable;
    d_ = observable.diagonal().real();
    d2_ = o2_.diagonal().real();
    s2k_ = std::sqrt(2.0 * k_ * mu_);
    s8k_ = std::sqrt(8.0 * k_);
    G_.resize(n_, n_);
    D_.resize(n_, n_);
    com_.resize(n_, n_);
    t1_.resize(n_, n_);
    t2_.resize(n_, n_);
    herm_.resize(n_, n_);
  }

  bool probed() const { return k_ > 0.0; }

  // advances rho by one step, returns the record sample
  double step(Mat& rho, double dt, double dW) {
    const double eo = diag_probe_ ? (rho.diagonal().real().array() * d_.array()).sum()
                                  : (o_ * rho).trace().real();
    const double lambda = probed() ? eo * dt + dW / s8k_ : 0.0;

    if (!probed()) {
      // closed-system mode: pure Hamiltonian Euler step
      commutator(rho);
      rho += dt * Complex(0, -1) * com_;
    } else if (scheme_ == StepScheme::MeasurementOperator) {
      measurement_operator_update(rho, dt, dW, eo);
    } else {
      commutator(rho);
      probe_terms(rho, eo);
      t1_ = rho + dt * (Complex(0, -1) * com_ + k_ * D_) + (s2k_ * dW) * G_;
      if (scheme_ == StepScheme::Milstein) {
        milstein_correction(rho, eo);
        t1_ += (k_ * mu_ * (dW * dW - dt)) * t2_;
      }
      rho.swap(t1_);
    }

    // the measurement-operator map is not trace-preserving; it always
    // renormalizes
    if (renorm_ || scheme_ == StepScheme::MeasurementOperator) {
      herm_ = rho.adjoint();
      rho += herm_;
      const double tr = 0.5 * rho.trace().real();
      if (!(tr > 1e-6))
        throw std::runtime_error("state trace collapsed below 1e-6: dt too large");
      rho *= 0.5 / tr;
    }
    return lambda;
  }

 private:
  // com_ = H rho - rho H
  void commutator(const Mat& rho) {
    if (tridiag_) {
      const double j = coupling_;
      com_.setZero();
      if (n_ > 1) {
        com_.topRows(n_ - 1) += j * rho.bottomRows(n_ - 1);
        com_.bottomRows(n_ - 1) += j * rho.topRows(n_ - 1);
        com_.leftCols(n_ - 1) -= j * rho.rightCols(n_ - 1);
        com_.rightCols(n_ - 1) -= j * rho.leftCols(n_ - 1);
      }
    } else {
      com_.noalias() = h_ * rho;
      com_.noalias() -= rho * h_;
    }
  }

  // G_ = O rho + rho O - 2 eo rho,  D_ = 2 O rho O - {O^2, rho}
  void probe_terms(const Mat& rho, double eo) {
    if (diag_probe_) {
      for (int c = 0; c < n_; ++c)
        for (int r = 0; r < n_; ++r) {
          const Complex v = rho(r, c);
          const double dr = d_(r), dc = d_(c);
          G_(r, c) = (dr + dc - 2.0 * eo) * v;
          D_(r, c) = (2.0 * dr * dc - d2_(r) - d2_(c)) * v;
        }
    } else {
      t1_.noalias() = o_ * rho;
      t2_.noalias() = rho * o_;
      G_ = t1_ + t2_ - (2.0 * eo) * rho;
      D_ = 2.0 * (t1_ * o_) - o2_ * rho - rho * o2_;
    }
  }

  // t2_ = O G + G O - 2 tr(O G) rho - 2 eo G  (derivative of the diffusion
  // term along itself; cancels the leading dW^2 purity error)
  void milstein_correction(const Mat& rho, double eo) {
    if (diag_probe_) {
      double trog = 0.0;
      for (int r = 0; r < n_; ++r) trog += d_(r) * G_(r, r).real();
      for (int c = 0; c < n_; ++c)
        for (int r = 0; r < n_; ++r)
          t2_(r, c) = (d_(r) + d_(c) - 2.0 * eo) * G_(r, c) - 2.0 * trog * rho(r, c);
    } else {
      t2_.noalias() = o_ * G_;
      t2_ += G_ * o_;
      const double trog = (o_ * G_).trace().real();
      t2_ -= 2.0 * trog * rho + 2.0 * eo * G_;
    }
  }

  // rho -> M rho M^dag with M = 1 - (iH + k O^2) dt + sqrt(2k) O dY,
  // dY = dW + sqrt(8k) eo dt. Exactly positive; rank-preserving. For the
  // tridiagonal lattice with a diagonal probe, M is tridiagonal and the
  // congruence costs O(N^2).
  void measurement_operator_update(Mat& rho, double dt, double dW, double eo) {
    const double dY = dW + s8k_ * eo * dt;
    if (diag_probe_ && tridiag_) {
      const Complex off(0, -dt * coupling_);
      mdc_ = (1.0 - dt * k_ * d2_.array() + s2k_ * dY * d_.array()).matrix().cast<Complex>();
      // t2 = M rho
      t2_ = mdc_.asDiagonal() * rho;
      if (n_ > 1) {
        t2_.topRows(n_ - 1) += off * rho.bottomRows(n_ - 1);
        t2_.bottomRows(n_ - 1) += off * rho.topRows(n_ - 1);
      }
      // rho = t2 M^dag
      rho = t2_ * mdc_.asDiagonal();
      if (n_ > 1) {
        rho.leftCols(n_ - 1) += std::conj(off) * t2_.rightCols(n_ - 1);
        rho.rightCols(n_ - 1) += std::conj(off) * t2_.leftCols(n_ - 1);
      }
    } else {
      t1_ = Complex(0, -dt) * h_;
      if (diag_probe_) {
        t1_.diagonal() +=
            (1.0 - dt * k_ * d2_.array() + s2k_ * dY * d_.array()).matrix().cast<Complex>();
      } else {
        t1_ += Mat::Identity(n_, n_) - (dt * k_) * o2_ + (s2k_ * dY) * o_;
      }
      t2_.noalias() = t1_ * rho;
      rho.noalias() = t2_ * t1_.adjoint();
    }
  }

  Mat h_;
  double k_, mu_;
  StepScheme scheme_;
  bool renorm_;
  double coupling_;
  bool tridiag_;
  int n_;
  bool diag_probe_ = false;
  Mat o_, o2_;
  RVec d_, d2_;
  double s2k_ = 0.0, s8k_ = 0.0;
  Mat G_, D_, com_, t1_, t2_, herm_;
  Vec mdc_;
};

std::pair<Mat, double> single_step(const Mat& rho, const Mat& h, const ProbeConfig& probe,
                                   double dt, double dW, bool renormalize, StepScheme scheme) {
  probe.validate();
  require_same_dim(h, rho, "sme step");
  require_same_dim(probe.observable, rho, "sme step");
  if (probe.strength <= 0.0)
    throw ConfigError("sme step with k = 0: record noise diverges; use the closed-system mode");
  Stepper stepper(h, probe.observable, probe.strength, probe.efficiency, scheme, renormalize,
                  0.0, false);
  Mat next = rho;
  const double lambda = stepper.step(next, dt, dW);
  return {next, lambda};
}

}  // namespace

std::pair<Mat, double> sme_step(const Mat& rho, const Mat& h, const ProbeConfig& probe,
                                double dt, double dW, bool renormalize) {
  return single_step(rho, h, probe, dt, dW, renormalize, StepScheme::EulerMaruyama);
}

std::pair<Mat, double> sme_step_milstein(const Mat& rho, const Mat& h, const ProbeConfig& probe,
                                         double dt, double dW, bool renormalize) {
  return single_step(rho, h, probe, dt, dW, renormalize, StepScheme::Milstein);
}

std::pair<Mat, double> measurement_operator_step(const Mat& rho, const Mat& h,
                                                 const ProbeConfig& probe, double dt, double dW,
                                                 bool renormalize) {
  return single_step(rho, h, probe, dt, dW, renormalize, StepScheme::MeasurementOperator);
}

namespace {

IntegrationConfig resolve_config(const IntegrationConfig& integ, double coupling, double strength) {
  IntegrationConfig cfg = integ;
  if (cfg.dt <= 0.0) cfg.dt = default_dt(coupling, strength);
  if (!std::isfinite(cfg.dt) || cfg.dt <= 0.0) throw ConfigError("integration.dt must be > 0");
  if (!cfg.allow_large_dt && cfg.dt > dt_guard(coupling, strength) * (1.0 + 1e-12))
    throw ConfigError("integration.dt exceeds the guard dt <= 0.01/max(J,k); "
                      "set allow_large_dt to override");
  if (cfg.t_final < cfg.dt) throw ConfigError("integration.t_final must be >= dt");
  return cfg;
}

TrajectoryResult run_trajectory(const LatticeSpec& spec, const Mat& initial,
                                const ProbeConfig* probe, const IntegrationConfig& integ,
                                std::uint64_t stream, const EigenSystem& es,
                                Mat* keep_states) {  // N^2 x n_samples, one column per sample
  const double strength = probe ? probe->strength : 0.0;
  const IntegrationConfig cfg = resolve_config(integ, spec.coupling, strength);
  const long long steps = std::llround(cfg.t_final / cfg.dt);
  const long long stride = cfg.sample_every > 0
                               ? cfg.sample_every
                               : std::max<long long>(1, steps / 1000);

  Stepper stepper(build_hamiltonian(spec),
                  probe ? probe->observable : Mat(Mat::Zero(spec.n_sites, spec.n_sites)),
                  strength, probe ? probe->efficiency : 1.0, cfg.scheme,
                  cfg.renormalize_every_step, spec.coupling, true);

  std::vector<long long> sample_steps;
  for (long long s = 0; s <= steps; s += stride) sample_steps.push_back(s);
  if (sample_steps.back() != steps) sample_steps.push_back(steps);
  const int n_samples = static_cast<int>(sample_steps.size());
  const int n = spec.n_sites;

  TrajectoryResult out;
  out.times.resize(n_samples);
  out.site_populations.resize(n_samples, n);
  out.parity.resize(n_samples);
  out.purity.resize(n_samples);
  out.record.dt = cfg.dt;
  out.record.strength = strength;
  out.record.efficiency = probe ? probe->efficiency : 1.0;
  if (probe) out.record.samples.reserve(steps);
  if (keep_states) keep_states->resize(n * n, n_samples);

  Mat rho = initial;
  Mat overlap(n, n);
  PhiloxRng rng(cfg.seed, stream);
  const double sqdt = std::sqrt(cfg.dt);

  int si = 0;
  Mat tmp(n, n);
  auto sample = [&](long long s) {
    out.times[si] = static_cast<double>(s) * cfg.dt;
    out.site_populations.row(si) = rho.diagonal().real();
    tmp.noalias() = rho * es.states;
    overlap.noalias() = es.states.adjoint() * tmp;
    ParityWeights w;
    for (int j = 0; j < n; ++j) {
      const double q = overlap(j, j).real();
      if (es.parity[j] == Parity::Odd)
        w.odd += q;
      else
        w.even += q;
    }
    out.parity[si] = w;
    out.purity[si] = rho.squaredNorm();
    if (keep_states) keep_states->col(si) = Eigen::Map<const Vec>(rho.data(), rho.size());
    ++si;
  };

  sample(0);
  for (long long s = 1; s <= steps; ++s) {
    const double dW = rng.gaussian(sqdt);
    const double lambda = stepper.step(rho, cfg.dt, dW);
    if (probe) out.record.samples.push_back(lambda);
    if (si < n_samples && sample_steps[si] == s) sample(s);
  }
  out.final_state = rho;
  return out;
}

EnsembleResult run_ensemble(const LatticeSpec& spec, const Mat& initial, const ProbeConfig& probe,
                            const IntegrationConfig& integ, int n_traj, int n_threads,
                            bool parallel) {
  if (n_traj < 1) throw ConfigError("ensemble requires n_traj >= 1");
  spec.validate();
  probe.validate();
  if (probe.strength <= 0.0)
    throw ConfigError("ensemble with k = 0: use the closed-system mode");
  validate_density(initial);
  const EigenSystem es = analytic_eigensystem(spec);

  EnsembleResult out;
  out.trajectories.resize(n_traj);

  const int nt = n_threads > 0 ? n_threads : omp_get_max_threads();
  constexpr int kBlock = 8;
  std::vector<Mat> block_states(std::min(kBlock, n_traj));
  Mat acc;
  bool acc_ready = false;

  std::exception_ptr failure;
  for (int base = 0; base < n_traj; base += kBlock) {
    const int bn = std::min(kBlock, n_traj - base);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt) if (parallel)
    for (int j = 0; j < bn; ++j) {
      try {
        out.trajectories[base + j] =
            run_trajectory(spec, initial, &probe, integ, static_cast<std::uint64_t>(base + j), es,
                           &block_states[j]);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    // reduction in trajectory-index order: output is independent of the
    // schedule and of nt
    for (int j = 0; j < bn; ++j) {
      if (!acc_ready) {
        acc = Mat::Zero(block_states[j].rows(), block_states[j].cols());
        out.avg_times = out.trajectories[base + j].times;
        acc_ready = true;
      }
      acc += block_states[j];
    }
  }
  const int n = spec.n_sites;
  out.avg_states.resize(acc.cols());
  for (Eigen::Index s = 0; s < acc.cols(); ++s)
    out.avg_states[s] = Eigen::Map<const Mat>(acc.col(s).data(), n, n) / double(n_traj);
  return out;
}

}  // namespace

TrajectoryResult simulate_trajectory(const LatticeSpec& spec, const Mat& initial,
                                     const ProbeConfig& probe, const IntegrationConfig& integ) {
  spec.validate();
  probe.validate();
  if (probe.strength <= 0.0)
    throw ConfigError("simulate_trajectory with k = 0: use the closed-system mode");
  validate_density(initial);
  return run_trajectory(spec, initial, &probe, integ, 0, analytic_eigensystem(spec), nullptr);
}

TrajectoryResult simulate_closed(const LatticeSpec& spec, const Mat& initial,
                                 const IntegrationConfig& integ) {
  spec.validate();
  validate_density(initial);
  return run_trajectory(spec, initial, nullptr, integ, 0, analytic_eigensystem(spec), nullptr);
}

EnsembleResult simulate_ensemble(const LatticeSpec& spec, const Mat& initial,
                                 const ProbeConfig& probe, const IntegrationConfig& integ,
                                 int n_traj, int n_threads) {
  return run_ensemble(spec, initial, probe, integ, n_traj, n_threads, true);
}

EnsembleResult simulate_ensemble_serial(const LatticeSpec& spec, const Mat& initial,
                                        const ProbeConfig& probe, const IntegrationConfig& integ,
                                        int n_traj) {
  return run_ensemble(spec, initial, probe, integ, n_traj, 1, false);
}

}  // namespace qtraj
