#pragma once

#include <utility>
#include <vector>

#include "qtraj/liouville.hpp"
#include "qtraj/sme.hpp"
#include "qtraj/spectrum_types.hpp"

namespace qtraj {

// DFT grid omega_m = 2 pi m / T, m = 1..floor(omega_max T / 2 pi).
// m = 0 is omitted: the mean-subtracted transform vanishes there and the
// resolvent spectrum treats DC separately.
RVec dft_grid(double duration, double omega_max);

// P(omega) = |sum_i e^{-i omega t_i} lambda_i|^2 / (2 pi T). Mean
// subtraction (default) removes the DC component, matching the
// DC-subtracted resolvent spectrum; the raw variant is kept for Parseval
// checks.
SpectrumEstimate periodogram(const MeasurementRecord& record,
                             const RVec& omegas, bool mean_subtract = true);

SpectrumEstimate average_spectra(const std::vector<SpectrumEstimate>& spectra);

// Periodogram of every record, averaged in record order (order-fixed
// reduction; output independent of thread count).
SpectrumEstimate average_periodograms(const std::vector<MeasurementRecord>& records,
                                      const RVec& omegas, bool mean_subtract = true,
                                      int n_threads = 0);
SpectrumEstimate average_periodograms_serial(const std::vector<MeasurementRecord>& records,
                                             const RVec& omegas,
                                             bool mean_subtract = true);

// White-noise level 1/(16 pi k) of the record periodogram.
double shot_noise_floor(double strength);

// Lowest-frequency local maximum above omega_min whose value exceeds 3x the
// local median, refined by parabolic interpolation. omega_min < 0 selects
// the default of 3 grid steps. Throws std::runtime_error if nothing
// qualifies.
double dominant_peak(const SpectrumEstimate& spectrum, double omega_min = -1.0);

// Half width at half maximum of a zero-centered peak, by linear
// interpolation of the first crossing below values(0)/2.
double half_width_at_half_max(const SpectrumEstimate& spectrum);

enum class ScalingModel { InverseN, InverseNSquared };

struct ScalingFit {
  double coefficient = 0.0;
  double residual = 0.0;  // RMS relative residual
};

ScalingFit scaling_fit(const std::vector<std::pair<int, double>>& points,
                       ScalingModel model);

// Appendix three-term record autocorrelation
// C(tau) = <O>^2 dt^2 - (sqrt(mu)/2)<O><O+O^dag> dt^2
//        + (sqrt(mu)/2) tr[O e^{L tau} {O, rho_ss}] dt^2.
CorrelationEstimate analytic_record_correlation(const LiouvilleOperator& liou,
                                                const Mat& rho_ss,
                                                const Mat& observable,
                                                const RVec& taus, double dt);

// Empirical mean of lambda_t lambda_{t+tau} over time origins and records,
// after discarding the initial transient. The tau = 0 point contains the
// dW^2 = dt contribution (value ~ dt/(8k)) and is on a different scale from
// the rest of the curve. Standard errors are over records.
CorrelationEstimate mc_record_correlation(const std::vector<MeasurementRecord>& records,
                                          const RVec& taus, double discard_time);

}  // namespace qtraj
