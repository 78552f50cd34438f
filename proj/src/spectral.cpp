#include "fwm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fwm/error.hpp"

namespace fwm {

double wavelength_to_angular_frequency(double wavelength_nm) {
  if (!(wavelength_nm > 0.0) || !std::isfinite(wavelength_nm)) {
    throw DomainError("wavelength must be positive, got " + std::to_string(wavelength_nm) + " nm");
  }
  return kTwoPi * kSpeedOfLight / (wavelength_nm * 1e-9);
}

double angular_frequency_to_wavelength(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("angular frequency must be positive, got " + std::to_string(omega));
  }
  return kTwoPi * kSpeedOfLight / omega * 1e9;
}

double bandwidth_nm_to_rad_per_s(double width_nm, double center_nm) {
  if (!(center_nm > 0.0) || width_nm < 0.0) throw DomainError("bandwidth conversion needs positive centre and non-negative width");
  const double lam = center_nm * 1e-9;
  return kTwoPi * kSpeedOfLight * (width_nm * 1e-9) / (lam * lam);
}

double bandwidth_rad_per_s_to_nm(double width_omega, double center_nm) {
  if (!(center_nm > 0.0) || width_omega < 0.0) throw DomainError("bandwidth conversion needs positive centre and non-negative width");
  const double lam = center_nm * 1e-9;
  return width_omega * lam * lam / (kTwoPi * kSpeedOfLight) * 1e9;
}

double fwhm_deconvolve(double measured_fwhm, double resolution_fwhm) {
  if (resolution_fwhm < 0.0) throw DomainError("resolution must be non-negative");
  if (!(measured_fwhm > resolution_fwhm)) {
    throw InfeasibleError("measured FWHM " + std::to_string(measured_fwhm) +
                          " does not exceed resolution " + std::to_string(resolution_fwhm));
  }
  return std::sqrt((measured_fwhm - resolution_fwhm) * (measured_fwhm + resolution_fwhm));
}

double fwhm_convolve(double fwhm, double resolution_fwhm) {
  if (fwhm < 0.0 || resolution_fwhm < 0.0) throw DomainError("widths must be non-negative");
  return std::hypot(fwhm, resolution_fwhm);
}

double transform_limited_duration(double fwhm_bandwidth_nm, double center_nm) {
  if (!(fwhm_bandwidth_nm > 0.0) || !(center_nm > 0.0)) {
    throw DomainError("transform limit needs positive bandwidth and centre wavelength");
  }
  const double lam = center_nm * 1e-9;
  const double delta_nu = kSpeedOfLight * (fwhm_bandwidth_nm * 1e-9) / (lam * lam);
  return kGaussianTimeBandwidth / delta_nu;
}

SpectralAxis::SpectralAxis(double start_wavelength_nm, double stop_wavelength_nm, std::size_t points)
    : start_nm_(start_wavelength_nm), stop_nm_(stop_wavelength_nm) {
  if (!(start_wavelength_nm > 0.0) || !(start_wavelength_nm < stop_wavelength_nm)) {
    throw DomainError("spectral axis needs 0 < start < stop");
  }
  if (points < 2) throw DomainError("spectral axis needs at least 2 points");
  const double lo = wavelength_to_angular_frequency(stop_wavelength_nm);
  const double hi = wavelength_to_angular_frequency(start_wavelength_nm);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  omega_.resize(points);
  for (std::size_t i = 0; i < points; ++i) omega_[i] = lo + step * static_cast<double>(i);
  omega_.back() = hi;
  weight_.assign(points, step);
  uniform_ = true;
}

SpectralAxis SpectralAxis::from_wavelengths(std::vector<double> wavelengths_nm) {
  if (wavelengths_nm.size() < 2) throw DomainError("spectral axis needs at least 2 points");
  SpectralAxis axis;
  axis.omega_.reserve(wavelengths_nm.size());
  for (double nm : wavelengths_nm) axis.omega_.push_back(wavelength_to_angular_frequency(nm));
  std::sort(axis.omega_.begin(), axis.omega_.end());
  if (std::adjacent_find(axis.omega_.begin(), axis.omega_.end()) != axis.omega_.end()) {
    throw DomainError("spectral axis samples must be unique");
  }
  axis.finish();
  return axis;
}

void SpectralAxis::finish() {
  const std::size_t n = omega_.size();
  start_nm_ = angular_frequency_to_wavelength(omega_.back());
  stop_nm_ = angular_frequency_to_wavelength(omega_.front());
  weight_.resize(n);
  weight_.front() = omega_[1] - omega_[0];
  weight_.back() = omega_[n - 1] - omega_[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) weight_[i] = 0.5 * (omega_[i + 1] - omega_[i - 1]);
  const double mean_step = (omega_.back() - omega_.front()) / static_cast<double>(n - 1);
  uniform_ = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((omega_[i] - omega_[i - 1]) - mean_step) > 1e-9 * mean_step) uniform_ = false;
  }
  if (uniform_) weight_.assign(n, mean_step);
}

double SpectralAxis::wavelength(std::size_t i) const { return angular_frequency_to_wavelength(omega_[i]); }

double SpectralAxis::omega_at(double t) const {
  const double last = static_cast<double>(omega_.size() - 1);
  t = std::clamp(t, 0.0, last);
  const auto i = static_cast<std::size_t>(std::min(std::floor(t), last - 1.0));
  const double frac = t - static_cast<double>(i);
  return omega_[i] + frac * (omega_[i + 1] - omega_[i]);
}

}  // namespace fwm
