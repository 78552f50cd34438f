#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fwm {

/// Propagation constant k(omega) of the guided mode as a Taylor expansion
/// about a reference frequency, plus an optional constant index offset that
/// selects one birefringent axis:
///
///   k(w) = sum_m beta_m (w - w0)^m / m!  +  dn * w / c
///
/// beta_m is in s^m/m. Immutable after construction.
class DispersionProfile {
 public:
  DispersionProfile(double reference_frequency, std::vector<double> beta_coefficients,
                    double min_wavelength_nm, double max_wavelength_nm, double index_offset = 0.0);

  double reference_frequency() const { return omega0_; }
  const std::vector<double>& beta_coefficients() const { return beta_; }
  double index_offset() const { return index_offset_; }
  double min_wavelength() const { return min_nm_; }
  double max_wavelength() const { return max_nm_; }
  double min_omega() const { return omega_min_; }
  double max_omega() const { return omega_max_; }
  bool contains(double omega) const { return omega >= omega_min_ && omega <= omega_max_; }

  /// Wavenumber in rad/m.
  double k(double omega) const;
  /// d^order k / d omega^order, analytic. order 1 is 1/v_g, order 2 is beta2.
  double derivative(double omega, int order) const;
  double beta1(double omega) const { return derivative(omega, 1); }
  double beta2(double omega) const { return derivative(omega, 2); }

  DispersionProfile with_index_offset(double index_offset) const;
  /// Adds c1 * (w - w0) to k, i.e. a constant to 1/v_g.
  DispersionProfile with_added_beta1(double c1) const;

 private:
  void check_domain(double omega) const;
  double taylor(double x, int order) const;

  double omega0_;
  std::vector<double> beta_;
  double min_nm_;
  double max_nm_;
  double omega_min_;
  double omega_max_;
  double index_offset_;
};

/// Group velocity 1/(dk/dw) in m/s. Throws InvalidProfileError when dk/dw <= 0.
double group_velocity(const DispersionProfile& profile, double omega);

/// D(lambda) = -(2 pi c / lambda^2) beta2, in ps/(nm km).
double dispersion_parameter(const DispersionProfile& profile, double wavelength_nm);

/// Converts D in ps/(nm km) at `wavelength_nm` to beta2 in s^2/m.
double beta2_from_dispersion_parameter(double d_ps_nm_km, double wavelength_nm);

struct ZdwOptions {
  std::size_t scan_points = 2000;
  // Bisection stops when the bracket is narrower than this...
  double bracket_tolerance_nm = 1e-9;
  // ...or |beta2| falls below this (s^2/m). Zero disables the early stop.
  double beta2_tolerance = 0.0;
};

/// Zero-dispersion wavelengths in [min_nm, max_nm], ascending. Every sign
/// change of beta2 on a uniform-in-omega scan grid is refined by bisection.
std::vector<double> find_zdws(const DispersionProfile& profile, double min_nm, double max_nm,
                              const ZdwOptions& options = {});

struct DSample {
  double wavelength_nm;
  double d_ps_nm_km;
};

struct DispersionFit {
  DispersionProfile profile;
  // RMS of (fitted D - sample D) in ps/(nm km).
  double residual_rms;
};

struct FitOptions {
  double beta0 = 0.0;
  double beta1_ref = 0.0;
  double index_offset = 0.0;
  // Evaluation domain of the result; defaults to the sample span.
  double min_wavelength_nm = 0.0;
  double max_wavelength_nm = 0.0;
};

/// Least-squares fit of beta2(w) as a polynomial of degree `beta2_degree`
/// in (w - w0) to the samples, integrated twice to give the Taylor
/// coefficients of k. Residuals are measured in D. Throws FitError on a
/// rank-deficient system.
DispersionFit fit_from_d_samples(const std::vector<DSample>& samples, int beta2_degree, double reference_frequency,
                                 const FitOptions& options = {});

std::vector<DSample> read_d_samples_csv(const std::filesystem::path& path);
std::vector<DSample> parse_d_samples_csv(const std::string& text, const std::string& source_name = "<memory>");

DispersionProfile profile_from_json(const std::string& text);
DispersionProfile read_profile_json(const std::filesystem::path& path);
std::string profile_to_json(const DispersionProfile& profile);

/// The shipped test profile: ZDWs at 747 and 1260 nm, pump 771 nm group-velocity
/// matched to 1542 nm and phase matched to 514 + 1542 nm.
const DispersionProfile& canonical_profile();
const std::string& canonical_profile_json();

}  // namespace fwm
