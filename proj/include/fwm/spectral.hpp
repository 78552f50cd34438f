#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace fwm {

// Exact SI speed of light in m/s.
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
// FWHM = kFwhmPerSigma * sigma for a Gaussian.
inline const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);
// Time-bandwidth product of a transform-limited Gaussian pulse.
inline constexpr double kGaussianTimeBandwidth = 0.441;

/// Angular frequency (rad/s) of vacuum wavelength `wavelength_nm`.
double wavelength_to_angular_frequency(double wavelength_nm);
/// Inverse of wavelength_to_angular_frequency; returns nm.
double angular_frequency_to_wavelength(double omega);

/// Converts a wavelength interval of width `width_nm` centred at `center_nm`
/// into angular-frequency width, to first order.
double bandwidth_nm_to_rad_per_s(double width_nm, double center_nm);
double bandwidth_rad_per_s_to_nm(double width_omega, double center_nm);

/// Removes a Gaussian instrument response from a measured FWHM:
/// sqrt(measured^2 - resolution^2).
double fwhm_deconvolve(double measured_fwhm, double resolution_fwhm);
/// Gaussian quadrature sum sqrt(a^2 + b^2).
double fwhm_convolve(double fwhm, double resolution_fwhm);

/// FWHM duration (seconds) of a transform-limited Gaussian pulse of spectral
/// FWHM `fwhm_bandwidth_nm` around `center_nm`.
double transform_limited_duration(double fwhm_bandwidth_nm, double center_nm);

/// Strictly increasing angular-frequency samples with rectangle-rule
/// quadrature weights. The usual construction is uniform in omega between two
/// wavelengths; samples are then stored ascending in omega, i.e. descending in
/// wavelength.
class SpectralAxis {
 public:
  SpectralAxis(double start_wavelength_nm, double stop_wavelength_nm, std::size_t points);

  /// Axis through arbitrary (unique, positive) wavelengths, e.g. an imported
  /// measurement grid. Order of the input does not matter.
  static SpectralAxis from_wavelengths(std::vector<double> wavelengths_nm);

  double start_wavelength() const { return start_nm_; }
  double stop_wavelength() const { return stop_nm_; }
  std::size_t size() const { return omega_.size(); }

  double omega(std::size_t i) const { return omega_[i]; }
  double wavelength(std::size_t i) const;
  const std::vector<double>& omegas() const { return omega_; }
  // Quadrature weight (cell width in rad/s) of sample i.
  double weight(std::size_t i) const { return weight_[i]; }
  const std::vector<double>& weights() const { return weight_; }
  bool uniform() const { return uniform_; }
  double center_wavelength() const { return 0.5 * (start_nm_ + stop_nm_); }
  double span_nm() const { return stop_nm_ - start_nm_; }

  /// Piecewise-linear omega at fractional index t in [0, size-1].
  double omega_at(double t) const;

 private:
  SpectralAxis() = default;
  void finish();

  double start_nm_ = 0.0;
  double stop_nm_ = 0.0;
  bool uniform_ = true;
  std::vector<double> omega_;
  std::vector<double> weight_;
};

struct Grid2D {
  SpectralAxis signal;
  SpectralAxis idler;

  double cell_area(std::size_t is, std::size_t ii) const { return signal.weight(is) * idler.weight(ii); }
};

}  // namespace fwm
