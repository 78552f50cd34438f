#pragma once

#include <Eigen/Core>

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "fwm/dispersion.hpp"
#include "fwm/phasematch.hpp"
#include "fwm/spectral.hpp"

namespace fwm {

enum class PumpShape { gaussian };

struct PumpEnvelope {
  PumpShape shape = PumpShape::gaussian;
  double center_nm = 771.0;
  double fwhm_nm = 3.0;  // intensity FWHM of the single-pump spectrum

  /// Two-photon pump amplitude alpha(ws + wi). For a Gaussian pump the
  /// autoconvolution is Gaussian with twice the amplitude variance.
  double two_photon_amplitude(double omega_sum) const;
};

enum class SpectrumKind {
  amplitude,  // values hold the complex JSA f(ws, wi)
  intensity,  // values hold a real, non-negative JSI in the real part
};

/// Discretized joint spectrum on a Grid2D; rows index signal samples, columns
/// idler samples. When normalized, sum |f|^2 dws dwi == 1 (amplitude) or
/// sum I dws dwi == 1 (intensity).
struct JointSpectrum {
  Grid2D grid;
  Eigen::MatrixXcd values;
  SpectrumKind kind = SpectrumKind::amplitude;
  bool normalized = false;

  /// |f|^2 for amplitudes, the stored values for intensities.
  Eigen::MatrixXd intensity() const;
  /// Integral of the intensity with the grid's quadrature weights.
  double total() const;
};

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

/// f(ws, wi) = alpha(ws + wi) * sinc(dk L / 2), normalized. OpenMP-parallel over
/// signal rows; bit-identical to build_jsa_serial for any thread count.
JointSpectrum build_jsa(const DispersionProfile& profile, const FwmConfig& config, const PumpEnvelope& envelope,
                        const Grid2D& grid);
JointSpectrum build_jsa_serial(const DispersionProfile& profile, const FwmConfig& config,
                               const PumpEnvelope& envelope, const Grid2D& grid);

/// Scales so that the quadrature integral of the intensity is 1.
void normalize(JointSpectrum& js);

struct Marginals {
  std::vector<double> signal;  // per rad/s
  std::vector<double> idler;
};

Marginals marginals(const JointSpectrum& js);

/// FWHM in nm of a sampled peak, by linear interpolation of the half-maximum
/// crossings. Throws EdgeError when the peak or a crossing is off the axis.
double fwhm_of_marginal(const std::vector<double>& intensity, const SpectralAxis& axis);

/// Wavelength (nm) of the largest sample.
double peak_wavelength(const std::vector<double>& intensity, const SpectralAxis& axis);
/// Intensity-weighted mean frequency, reported as a wavelength (nm).
double centroid_wavelength(const std::vector<double>& intensity, const SpectralAxis& axis);

/// Gaussian instrument response applied to the intensity along each axis, with
/// resolutions given as FWHM in nm at each axis centre. Returns an intensity
/// spectrum; total integral is preserved.
JointSpectrum convolve_instrument(const JointSpectrum& js, double signal_resolution_nm, double idler_resolution_nm);

// JSI exports. Matrix form: first row holds idler wavelengths, first column
// signal wavelengths. Long form: signal_nm, idler_nm, intensity.
std::string jsi_matrix_csv(const JointSpectrum& js);
std::string jsi_long_csv(const JointSpectrum& js);
std::string marginals_csv(const JointSpectrum& js);

/// Reads a long-form JSI (signal_nm, idler_nm, intensity) on a rectangular
/// grid. The result is an intensity spectrum, normalized.
JointSpectrum parse_jsi_long_csv(const std::string& text, const std::string& source_name = "<memory>");
JointSpectrum read_jsi_long_csv(const std::filesystem::path& path);

}  // namespace fwm
