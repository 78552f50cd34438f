#pragma once

#include <vector>

#include "fwm/dispersion.hpp"
#include "fwm/spectral.hpp"

namespace fwm {

// Placeholder nonlinear coefficient typical of small-core PCF, 1/(W m).
inline constexpr double kDefaultGamma = 0.08;

struct FwmConfig {
  double gamma = kDefaultGamma;       // 1/(W m)
  double peak_pump_power = 0.0;       // W
  double fiber_length = 0.65;         // m
  double pump_center_nm = 771.0;
  double pump_fwhm_nm = 3.0;

  // Throws DomainError when a field is out of range.
  void validate() const;
};

/// Peak power of a pulse train: average / (rate * duration).
double peak_power_from_average(double average_power_w, double repetition_rate_hz, double pulse_duration_s);

struct ContourPoint {
  double pump_nm;
  double signal_nm;
  double idler_nm;
  double residual_mismatch;  // rad/m
};

/// 2k(wp) - 2 gamma Pp - k(ws) - k(wi) with wp = (ws + wi)/2, in rad/m.
double delta_k(const DispersionProfile& profile, const FwmConfig& config, double omega_signal, double omega_idler);

struct ContourOptions {
  // Degeneracy guard: detunings at or below this are not searched (rad/s).
  double min_detuning = kTwoPi * 1e12;
  std::size_t scan_points = 4000;
  double mismatch_tolerance = 1e-6;  // rad/m
  double bracket_tolerance = 1e-3;   // rad/s
};

/// Phase-matched detunings Omega > min_detuning for pump frequency `omega_pump`,
/// with ws = wp + Omega and wi = wp - Omega. Ascending in Omega.
std::vector<double> phase_matched_detunings(const DispersionProfile& profile, const FwmConfig& config,
                                            double omega_pump, const ContourOptions& options = {});

/// Pump wavelengths evenly spaced over [pump_min_nm, pump_max_nm] (inclusive).
std::vector<double> pump_wavelengths(double pump_min_nm, double pump_max_nm, std::size_t pump_steps);

/// Phase-matching contour over a pump range, in pump order. OpenMP-parallel
/// over pump steps; output is independent of the thread count.
std::vector<ContourPoint> solve_contour(const DispersionProfile& profile, const FwmConfig& config, double pump_min_nm,
                                        double pump_max_nm, std::size_t pump_steps, const ContourOptions& options = {});
/// Single-threaded reference for solve_contour.
std::vector<ContourPoint> solve_contour_serial(const DispersionProfile& profile, const FwmConfig& config,
                                               double pump_min_nm, double pump_max_nm, std::size_t pump_steps,
                                               const ContourOptions& options = {});

struct GvMatch {
  double pump_nm;
  double signal_nm;
  double idler_nm;
  double inverse_gv_mismatch;  // 1/v_g(p) - 1/v_g(i), s/m
};

/// Pump wavelength in [pump_min_nm, pump_max_nm] at which pump and idler
/// group velocities coincide along the outermost phase-matched branch.
/// Throws NotFoundError without a sign change.
GvMatch gv_matched_pump(const DispersionProfile& profile, const FwmConfig& config, double pump_min_nm,
                        double pump_max_nm, const ContourOptions& options = {});

}  // namespace fwm
