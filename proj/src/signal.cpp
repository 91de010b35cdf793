#include "qtraj/signal.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace qtraj {

RVec dft_grid(double duration, double omega_max) {
  if (!(duration > 0)) throw ConfigError("dft_grid: duration must be > 0");
  if (!(omega_max > 0)) throw ConfigError("dft_grid: omega_max must be > 0");
  const double step = 2.0 * M_PI / duration;
  const int m_max = static_cast<int>(std::floor(omega_max / step));
  if (m_max < 1) throw ConfigError("dft_grid: omega_max below one grid step");
  RVec grid(m_max);
  for (int m = 1; m <= m_max; ++m) grid(m - 1) = step * m;
  return grid;
}

namespace {

void single_periodogram(const MeasurementRecord& record, const RVec& omegas, bool mean_subtract,
                        RVec& out) {
  const auto n = static_cast<Eigen::Index>(record.samples.size());
  const double duration = record.dt * static_cast<double>(n);
  double mean = 0.0;
  if (mean_subtract) {
    for (double v : record.samples) mean += v;
    mean /= static_cast<double>(n);
  }
  for (Eigen::Index w = 0; w < omegas.size(); ++w) {
    const Complex z = std::polar(1.0, -omegas(w) * record.dt);
    Complex phase = 1.0;
    Complex sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += (record.samples[i] - mean) * phase;
      phase *= z;
    }
    out(w) = std::norm(sum) / (2.0 * M_PI * duration);
  }
}

}  // namespace

SpectrumEstimate periodogram(const MeasurementRecord& record, const RVec& omegas,
                             bool mean_subtract) {
  if (record.samples.empty()) throw ConfigError("periodogram: empty record");
  SpectrumEstimate est;
  est.omegas = omegas;
  est.values.resize(omegas.size());
  est.kind = SpectrumKind::Periodogram;
  est.meta.strength = record.strength;
  est.meta.efficiency = record.efficiency;
  est.meta.duration = record.dt * static_cast<double>(record.samples.size());
  single_periodogram(record, omegas, mean_subtract, est.values);
  return est;
}

SpectrumEstimate average_spectra(const std::vector<SpectrumEstimate>& spectra) {
  if (spectra.empty()) throw ConfigError("average_spectra: empty list");
  SpectrumEstimate out = spectra.front();
  out.meta.n_traj = spectra.front().meta.n_traj;
  for (std::size_t i = 1; i < spectra.size(); ++i) {
    const auto& s = spectra[i];
    if (s.kind != out.kind) throw ConfigError("average_spectra: mixed estimator kinds");
    if (s.omegas.size() != out.omegas.size() ||
        (s.omegas - out.omegas).cwiseAbs().maxCoeff() > 0.0)
      throw ConfigError("average_spectra: grids differ");
    out.values += s.values;
    out.meta.n_traj += s.meta.n_traj;
  }
  out.values /= static_cast<double>(spectra.size());
  return out;
}

namespace {

SpectrumEstimate average_periodograms_impl(const std::vector<MeasurementRecord>& records,
                                           const RVec& omegas, bool mean_subtract, int n_threads,
                                           bool parallel) {
  if (records.empty()) throw ConfigError("average_periodograms: no records");
  RMat per(records.size(), omegas.size());
  const int nt = n_threads > 0 ? n_threads : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(nt) if (parallel)
  for (std::size_t r = 0; r < records.size(); ++r) {
    try {
      if (records[r].samples.empty()) throw ConfigError("average_periodograms: empty record");
      RVec row(omegas.size());
      single_periodogram(records[r], omegas, mean_subtract, row);
      per.row(static_cast<Eigen::Index>(r)) = row;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  SpectrumEstimate est;
  est.omegas = omegas;
  est.kind = SpectrumKind::Periodogram;
  est.meta.strength = records.front().strength;
  est.meta.efficiency = records.front().efficiency;
  est.meta.duration = records.front().dt * static_cast<double>(records.front().samples.size());
  est.meta.n_traj = static_cast<int>(records.size());
  // record-index order, independent of the parallel schedule
  RVec sum = RVec::Zero(omegas.size());
  for (Eigen::Index r = 0; r < per.rows(); ++r) sum += per.row(r);
  est.values = sum / static_cast<double>(records.size());
  return est;
}

}  // namespace

SpectrumEstimate average_periodograms(const std::vector<MeasurementRecord>& records,
                                      const RVec& omegas, bool mean_subtract, int n_threads) {
  return average_periodograms_impl(records, omegas, mean_subtract, n_threads, true);
}

SpectrumEstimate average_periodograms_serial(const std::vector<MeasurementRecord>& records,
                                             const RVec& omegas, bool mean_subtract) {
  return average_periodograms_impl(records, omegas, mean_subtract, 1, false);
}

double shot_noise_floor(double strength) {
  if (!(strength > 0)) throw ConfigError("shot_noise_floor: strength must be > 0");
  return 1.0 / (16.0 * M_PI * strength);
}

double dominant_peak(const SpectrumEstimate& spectrum, double omega_min) {
  const auto n = spectrum.omegas.size();
  if (n < 5) throw std::runtime_error("dominant_peak: grid too short");
  const double step = spectrum.omegas(1) - spectrum.omegas(0);
  if (omega_min < 0) omega_min = spectrum.omegas(0) + 2.0 * step;  // 3 grid steps from DC
  // moving average over +-2 bins tames single-record bin noise
  RVec s(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, j - 2);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, j + 2);
    s(j) = spectrum.values.segment(lo, hi - lo + 1).mean();
  }
  // the local median window is wide compared to a peak and excludes the
  // candidate's own core
  const Eigen::Index w = std::max<Eigen::Index>(15, n / 6);
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    if (spectrum.omegas(j) < omega_min) continue;
    const double v = s(j);
    if (!(v > s(j - 1) && v >= s(j + 1))) continue;
    std::vector<double> window;
    for (Eigen::Index l = std::max<Eigen::Index>(0, j - w);
         l <= std::min<Eigen::Index>(n - 1, j + w); ++l)
      if (std::abs(l - j) > 3) window.push_back(s(l));
    std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
    const double med = window[window.size() / 2];
    if (!(v > 3.0 * med)) continue;
    const double vl = s(j - 1), vr = s(j + 1);
    const double denom = vl - 2.0 * v + vr;
    const double shift = denom != 0.0 ? 0.5 * (vl - vr) / denom : 0.0;
    return spectrum.omegas(j) + shift * step;
  }
  throw std::runtime_error("dominant_peak: no qualifying peak above omega_min");
}

double half_width_at_half_max(const SpectrumEstimate& spectrum) {
  if (spectrum.values.size() < 3) throw std::runtime_error("half_width_at_half_max: grid too short");
  const double half = spectrum.values(0) / 2.0;
  for (Eigen::Index j = 1; j < spectrum.values.size(); ++j) {
    if (spectrum.values(j) <= half) {
      const double v0 = spectrum.values(j - 1), v1 = spectrum.values(j);
      const double frac = (v0 - half) / (v0 - v1);
      return spectrum.omegas(j - 1) + frac * (spectrum.omegas(j) - spectrum.omegas(j - 1));
    }
  }
  throw std::runtime_error("half_width_at_half_max: no crossing below half maximum on the grid");
}

ScalingFit scaling_fit(const std::vector<std::pair<int, double>>& points, ScalingModel model) {
  if (points.size() < 3) throw ConfigError("scaling_fit: need at least 3 points");
  const double p = model == ScalingModel::InverseN ? 1.0 : 2.0;
  double num = 0, den = 0;
  for (const auto& [n, f] : points) {
    const double x = std::pow(static_cast<double>(n), -p);
    num += f * x;
    den += x * x;
  }
  ScalingFit fit;
  fit.coefficient = num / den;
  double ss = 0;
  for (const auto& [n, f] : points) {
    const double pred = fit.coefficient * std::pow(static_cast<double>(n), -p);
    const double rel = (f - pred) / f;
    ss += rel * rel;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(points.size()));
  return fit;
}

CorrelationEstimate analytic_record_correlation(const LiouvilleOperator& liou, const Mat& rho_ss,
                                                const Mat& observable, const RVec& taus,
                                                double dt) {
  require_same_dim(liou.h, rho_ss, "analytic_record_correlation");
  require_same_dim(liou.h, observable, "analytic_record_correlation");
  const double mu = 1.0;  // the simulated case
  const double dt2 = dt * dt;
  const double avg = (observable * rho_ss).trace().real();
  const double avg2 = ((observable + observable.adjoint()) * rho_ss).trace().real();
  const Vec ov = vectorize(observable);
  const Vec anti = vectorize(Mat(observable * rho_ss + rho_ss * observable));

  CorrelationEstimate out;
  out.taus = taus;
  out.values.resize(taus.size());
  out.has_stderr = false;

  // raw (unnormalized) propagation of {O, rho_ss}
  bool uniform = taus.size() >= 2 && taus(0) == 0.0;
  const double d0 = taus.size() >= 2 ? taus(1) - taus(0) : 0.0;
  for (Eigen::Index i = 0; i + 1 < taus.size(); ++i)
    if (std::abs((taus(i + 1) - taus(i)) - d0) > 1e-12 * std::max(1.0, d0)) uniform = false;
  const double base = avg * avg * dt2 - 0.5 * std::sqrt(mu) * avg * avg2 * dt2;
  if (uniform && d0 > 0.0) {
    const Mat prop = (liou.generator * d0).exp();
    Vec v = anti;
    for (Eigen::Index i = 0; i < taus.size(); ++i) {
      out.values(i) = base + 0.5 * std::sqrt(mu) * ov.dot(v).real() * dt2;
      if (i + 1 < taus.size()) v = prop * v;
    }
  } else {
    for (Eigen::Index i = 0; i < taus.size(); ++i) {
      const Vec v = (liou.generator * taus(i)).exp() * anti;
      out.values(i) = base + 0.5 * std::sqrt(mu) * ov.dot(v).real() * dt2;
    }
  }
  return out;
}

CorrelationEstimate mc_record_correlation(const std::vector<MeasurementRecord>& records,
                                          const RVec& taus, double discard_time) {
  if (records.size() < 50) throw ConfigError("mc_record_correlation: too few records (need >= 50)");
  const double dt = records.front().dt;
  const auto n = static_cast<long long>(records.front().samples.size());
  for (const auto& r : records)
    if (r.dt != dt || static_cast<long long>(r.samples.size()) != n)
      throw ConfigError("mc_record_correlation: records differ in shape");

  std::vector<long long> lags(taus.size());
  for (Eigen::Index j = 0; j < taus.size(); ++j) {
    lags[j] = std::llround(taus(j) / dt);
    if (lags[j] < 0 || std::abs(taus(j) - static_cast<double>(lags[j]) * dt) > 1e-9)
      throw ConfigError("mc_record_correlation: tau grid must align with the record dt");
  }
  const long long i0 = std::min<long long>(std::max<long long>(0, std::llround(discard_time / dt)),
                                           n - 1);
  const auto nrec = static_cast<Eigen::Index>(records.size());
  RMat per(nrec, taus.size());
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index r = 0; r < nrec; ++r) {
    const auto& s = records[static_cast<std::size_t>(r)].samples;
    for (Eigen::Index j = 0; j < taus.size(); ++j) {
      const long long l = lags[j];
      const long long hi = n - l;
      double acc = 0;
      for (long long i = i0; i < hi; ++i) acc += s[i] * s[i + l];
      per(r, j) = hi > i0 ? acc / static_cast<double>(hi - i0) : 0.0;
    }
  }

  CorrelationEstimate out;
  out.taus = taus;
  out.has_stderr = true;
  out.values = per.colwise().mean();
  out.stderrs.resize(taus.size());
  for (Eigen::Index j = 0; j < taus.size(); ++j) {
    const double m = out.values(j);
    double ss = 0;
    for (Eigen::Index r = 0; r < nrec; ++r) ss += (per(r, j) - m) * (per(r, j) - m);
    out.stderrs(j) = std::sqrt(ss / (static_cast<double>(nrec) * (nrec - 1.0)));
  }
  return out;
}

}  // namespace qtraj
