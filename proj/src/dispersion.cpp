#include "fwm/dispersion.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "canonical_profile_data.hpp"
#include "fwm/error.hpp"
#include "fwm/io.hpp"
#include "fwm/spectral.hpp"

namespace fwm {

DispersionProfile::DispersionProfile(double reference_frequency, std::vector<double> beta_coefficients,
                                     double min_wavelength_nm, double max_wavelength_nm, double index_offset)
    : omega0_(reference_frequency),
      beta_(std::move(beta_coefficients)),
      min_nm_(min_wavelength_nm),
      max_nm_(max_wavelength_nm),
      index_offset_(index_offset) {
  if (!(omega0_ > 0.0)) throw InvalidProfileError("reference frequency must be positive");
  if (beta_.size() < 4) throw InvalidProfileError("profile needs beta_0 .. beta_3 at least");
  for (double b : beta_) {
    if (!std::isfinite(b)) throw InvalidProfileError("non-finite beta coefficient");
  }
  if (!(min_nm_ > 0.0) || !(min_nm_ < max_nm_)) throw InvalidProfileError("profile domain needs 0 < min < max");
  omega_min_ = wavelength_to_angular_frequency(max_nm_);
  omega_max_ = wavelength_to_angular_frequency(min_nm_);
}

void DispersionProfile::check_domain(double omega) const {
  if (!contains(omega)) {
    throw DomainError(fmt::format("omega {:.6e} rad/s ({:.4f} nm) outside profile domain [{}, {}] nm", omega,
                                  omega > 0 ? angular_frequency_to_wavelength(omega) : 0.0, min_nm_, max_nm_));
  }
}

// sum_{m >= order} beta_m x^(m-order) / (m-order)!, Horner form.
double DispersionProfile::taylor(double x, int order) const {
  const int top = static_cast<int>(beta_.size()) - 1;
  if (order > top) return 0.0;
  double acc = beta_[top];
  for (int m = top - 1; m >= order; --m) acc = beta_[m] + acc * x / static_cast<double>(m + 1 - order);
  return acc;
}

double DispersionProfile::k(double omega) const {
  check_domain(omega);
  return taylor(omega - omega0_, 0) + index_offset_ * omega / kSpeedOfLight;
}

double DispersionProfile::derivative(double omega, int order) const {
  check_domain(omega);
  if (order < 0) throw DomainError("derivative order must be non-negative");
  if (order == 0) return k(omega);
  double value = taylor(omega - omega0_, order);
  if (order == 1) value += index_offset_ / kSpeedOfLight;
  return value;
}

DispersionProfile DispersionProfile::with_index_offset(double index_offset) const {
  return DispersionProfile(omega0_, beta_, min_nm_, max_nm_, index_offset);
}

DispersionProfile DispersionProfile::with_added_beta1(double c1) const {
  auto beta = beta_;
  beta[1] += c1;
  return DispersionProfile(omega0_, std::move(beta), min_nm_, max_nm_, index_offset_);
}

double group_velocity(const DispersionProfile& profile, double omega) {
  const double b1 = profile.beta1(omega);
  if (!(b1 > 0.0)) throw InvalidProfileError(fmt::format("dk/dw = {} is not positive", b1));
  return 1.0 / b1;
}

double dispersion_parameter(const DispersionProfile& profile, double wavelength_nm) {
  const double omega = wavelength_to_angular_frequency(wavelength_nm);
  const double lam = wavelength_nm * 1e-9;
  // s/m^2 -> ps/(nm km)
  return -(kTwoPi * kSpeedOfLight / (lam * lam)) * profile.beta2(omega) * 1e6;
}

double beta2_from_dispersion_parameter(double d_ps_nm_km, double wavelength_nm) {
  const double lam = wavelength_nm * 1e-9;
  return -d_ps_nm_km * 1e-6 * lam * lam / (kTwoPi * kSpeedOfLight);
}

std::vector<double> find_zdws(const DispersionProfile& profile, double min_nm, double max_nm,
                              const ZdwOptions& options) {
  if (!(min_nm < max_nm)) throw DomainError("ZDW search range needs min < max");
  if (options.scan_points < 2) throw DomainError("ZDW scan needs at least 2 points");
  const double w_lo = wavelength_to_angular_frequency(max_nm);
  const double w_hi = wavelength_to_angular_frequency(min_nm);
  if (!profile.contains(w_lo) || !profile.contains(w_hi)) {
    throw DomainError(fmt::format("ZDW search range [{}, {}] nm outside profile domain", min_nm, max_nm));
  }
  const auto n = options.scan_points;
  const double step = (w_hi - w_lo) / static_cast<double>(n - 1);
  auto omega_at = [&](std::size_t i) { return i + 1 == n ? w_hi : w_lo + step * static_cast<double>(i); };

  std::vector<double> roots;
  double w_prev = omega_at(0);
  double b_prev = profile.beta2(w_prev);
  if (b_prev == 0.0) roots.push_back(w_prev);
  for (std::size_t i = 1; i < n; ++i) {
    const double w = omega_at(i);
    const double b = profile.beta2(w);
    if (b == 0.0) {
      roots.push_back(w);
    } else if (b_prev != 0.0 && (b_prev < 0.0) != (b < 0.0)) {
      double lo = w_prev, hi = w, f_lo = b_prev;
      while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = profile.beta2(mid);
        if (f_mid == 0.0 || std::abs(f_mid) < options.beta2_tolerance) {
          lo = hi = mid;
          break;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
        const double width_nm = angular_frequency_to_wavelength(lo) - angular_frequency_to_wavelength(hi);
        if (width_nm < options.bracket_tolerance_nm) break;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    w_prev = w;
    b_prev = b;
  }
  std::vector<double> out;
  out.reserve(roots.size());
  for (double w : roots) out.push_back(angular_frequency_to_wavelength(w));
  std::sort(out.begin(), out.end());
  return out;
}

DispersionFit fit_from_d_samples(const std::vector<DSample>& samples, int beta2_degree, double reference_frequency,
                                 const FitOptions& options) {
  if (beta2_degree < 1) throw FitError("beta2 polynomial degree must be at least 1");
  const auto cols = static_cast<Eigen::Index>(beta2_degree + 1);
  if (static_cast<Eigen::Index>(samples.size()) < cols) {
    throw FitError(fmt::format("{} samples cannot determine a degree-{} fit", samples.size(), beta2_degree));
  }
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::VectorXd x(rows), y(rows);
  double scale = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    x[r] = wavelength_to_angular_frequency(s.wavelength_nm) - reference_frequency;
    y[r] = beta2_from_dispersion_parameter(s.d_ps_nm_km, s.wavelength_nm);
    scale = std::max(scale, std::abs(x[r]));
  }
  if (scale == 0.0) scale = 1.0;
  double y_scale = y.cwiseAbs().maxCoeff();
  if (y_scale == 0.0) y_scale = 1.0;

  Eigen::MatrixXd vander(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double p = 1.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      vander(r, c) = p;
      p *= x[r] / scale;
    }
  }
  // Residuals are weighted by 1/lambda^2 so the fit is least squares in D.
  Eigen::VectorXd weight(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double lam = samples[static_cast<std::size_t>(r)].wavelength_nm;
    weight[r] = (samples.front().wavelength_nm / lam) * (samples.front().wavelength_nm / lam);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weight.asDiagonal() * vander);
  qr.setThreshold(1e-12);
  if (qr.rank() < cols) throw FitError(fmt::format("rank-deficient dispersion fit (rank {} < {})", qr.rank(), cols));
  const Eigen::VectorXd coef = qr.solve(weight.cwiseProduct(y) / y_scale) * y_scale;

  // beta2(x) = sum_j coef_j (x/scale)^j  =>  beta_{j+2} = coef_j j! / scale^j
  std::vector<double> beta{options.beta0, options.beta1_ref};
  double fact = 1.0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (j > 0) fact *= static_cast<double>(j);
    beta.push_back(coef[j] * fact / std::pow(scale, static_cast<double>(j)));
  }
  while (beta.size() < 4) beta.push_back(0.0);

  double lo_nm = options.min_wavelength_nm, hi_nm = options.max_wavelength_nm;
  if (!(lo_nm > 0.0) || !(hi_nm > lo_nm)) {
    lo_nm = hi_nm = samples.front().wavelength_nm;
    for (const auto& s : samples) {
      lo_nm = std::min(lo_nm, s.wavelength_nm);
      hi_nm = std::max(hi_nm, s.wavelength_nm);
    }
  }
  DispersionProfile profile(reference_frequency, std::move(beta), lo_nm, hi_nm, options.index_offset);

  const Eigen::VectorXd fitted = vander * coef;
  double sum_sq = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    const double lam = s.wavelength_nm * 1e-9;
    const double d_fit = -(kTwoPi * kSpeedOfLight / (lam * lam)) * fitted[r] * 1e6;
    sum_sq += (d_fit - s.d_ps_nm_km) * (d_fit - s.d_ps_nm_km);
  }
  return DispersionFit{std::move(profile), std::sqrt(sum_sq / static_cast<double>(rows))};
}

std::vector<DSample> parse_d_samples_csv(const std::string& text, const std::string& source_name) {
  const auto table = io::parse_csv(text, source_name);
  if (table.header.size() != 2) {
    throw ConfigError(fmt::format("{}: D-sample CSV needs exactly two columns (wavelength_nm, D_ps_per_nm_km)",
                                  source_name));
  }
  std::vector<DSample> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (!(row[0] > 0.0)) throw ConfigError(fmt::format("{}: non-positive wavelength {}", source_name, row[0]));
    out.push_back({row[0], row[1]});
  }
  return out;
}

std::vector<DSample> read_d_samples_csv(const std::filesystem::path& path) {
  return parse_d_samples_csv(io::read_file(path), path.string());
}

DispersionProfile profile_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto& domain = j.at("domain");
    return DispersionProfile(j.at("reference_frequency").get<double>(),
                             j.at("beta_coefficients").get<std::vector<double>>(), domain.at(0).get<double>(),
                             domain.at(1).get<double>(), j.value("index_offset", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid profile JSON: ") + e.what());
  }
}

DispersionProfile read_profile_json(const std::filesystem::path& path) {
  return profile_from_json(io::read_file(path));
}

std::string profile_to_json(const DispersionProfile& profile) {
  nlohmann::json j;
  j["reference_frequency"] = profile.reference_frequency();
  j["beta_coefficients"] = profile.beta_coefficients();
  j["index_offset"] = profile.index_offset();
  j["domain"] = {profile.min_wavelength(), profile.max_wavelength()};
  return j.dump(2) + "\n";
}

const std::string& canonical_profile_json() {
  static const std::string text(detail::kCanonicalProfileJson);
  return text;
}

const DispersionProfile& canonical_profile() {
  static const DispersionProfile profile = profile_from_json(canonical_profile_json());
  return profile;
}

}  // namespace fwm
