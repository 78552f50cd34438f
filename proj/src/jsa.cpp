#include "fwm/jsa.hpp"

#include "fwm/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fwm/error.hpp"
#include "fwm/io.hpp"

namespace fwm {

double PumpEnvelope::two_photon_amplitude(double omega_sum) const {
  const double center = 2.0 * wavelength_to_angular_frequency(center_nm);
  const double sigma_intensity = bandwidth_nm_to_rad_per_s(fwhm_nm, center_nm) / kFwhmPerSigma;
  const double d = omega_sum - center;
  // single pump amplitude exp(-d^2 / (4 s^2)); autoconvolution doubles the variance
  return std::exp(-d * d / (8.0 * sigma_intensity * sigma_intensity));
}

Eigen::MatrixXd JointSpectrum::intensity() const {
  if (kind == SpectrumKind::intensity) return values.real();
  return values.cwiseAbs2();
}

double JointSpectrum::total() const {
  const Eigen::MatrixXd inten = intensity();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < inten.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < inten.cols(); ++j) row += inten(i, j) * grid.idler.weight(static_cast<std::size_t>(j));
    sum += row * grid.signal.weight(static_cast<std::size_t>(i));
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

namespace {

void check_grid(const DispersionProfile& profile, const Grid2D& grid) {
  for (const SpectralAxis* axis : {&grid.signal, &grid.idler}) {
    if (!profile.contains(axis->omegas().front()) || !profile.contains(axis->omegas().back())) {
      throw DomainError(fmt::format("grid axis [{}, {}] nm outside profile domain [{}, {}] nm",
                                    axis->start_wavelength(), axis->stop_wavelength(), profile.min_wavelength(),
                                    profile.max_wavelength()));
    }
  }
  const double lo = 0.5 * (grid.signal.omegas().front() + grid.idler.omegas().front());
  const double hi = 0.5 * (grid.signal.omegas().back() + grid.idler.omegas().back());
  if (!profile.contains(lo) || !profile.contains(hi)) throw DomainError("pump frequencies of grid outside profile domain");
}

std::complex<double> jsa_cell(const DispersionProfile& profile, const FwmConfig& config, const PumpEnvelope& envelope,
                              double ws, double wi) {
  const double mismatch = delta_k(profile, config, ws, wi);
  return {envelope.two_photon_amplitude(ws + wi) * sinc(0.5 * mismatch * config.fiber_length), 0.0};
}

JointSpectrum empty_spectrum(const Grid2D& grid) {
  JointSpectrum js{grid, Eigen::MatrixXcd(static_cast<Eigen::Index>(grid.signal.size()),
                                          static_cast<Eigen::Index>(grid.idler.size())),
                   SpectrumKind::amplitude, false};
  return js;
}

}  // namespace

JointSpectrum build_jsa(const DispersionProfile& profile, const FwmConfig& config, const PumpEnvelope& envelope,
                        const Grid2D& grid) {
  config.validate();
  check_grid(profile, grid);
  JointSpectrum js = empty_spectrum(grid);
  const auto rows = js.values.rows();
  const auto cols = js.values.cols();
  LoopErrors errors;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    errors.run([&] {
      const double ws = grid.signal.omega(static_cast<std::size_t>(i));
      for (Eigen::Index j = 0; j < cols; ++j) {
        js.values(i, j) = jsa_cell(profile, config, envelope, ws, grid.idler.omega(static_cast<std::size_t>(j)));
      }
    });
  }
  errors.rethrow();
  normalize(js);
  return js;
}

JointSpectrum build_jsa_serial(const DispersionProfile& profile, const FwmConfig& config,
                               const PumpEnvelope& envelope, const Grid2D& grid) {
  config.validate();
  check_grid(profile, grid);
  JointSpectrum js = empty_spectrum(grid);
  for (Eigen::Index i = 0; i < js.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < js.values.cols(); ++j) {
      js.values(i, j) = jsa_cell(profile, config, envelope, grid.signal.omega(static_cast<std::size_t>(i)),
                                 grid.idler.omega(static_cast<std::size_t>(j)));
    }
  }
  normalize(js);
  return js;
}

void normalize(JointSpectrum& js) {
  const double total = js.total();
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateInputError("joint spectrum has zero norm");
  if (js.kind == SpectrumKind::amplitude) {
    js.values /= std::sqrt(total);
  } else {
    js.values /= total;
  }
  js.normalized = true;
}

Marginals marginals(const JointSpectrum& js) {
  const Eigen::MatrixXd inten = js.intensity();
  Marginals m{std::vector<double>(js.grid.signal.size(), 0.0), std::vector<double>(js.grid.idler.size(), 0.0)};
  for (Eigen::Index i = 0; i < inten.rows(); ++i) {
    for (Eigen::Index j = 0; j < inten.cols(); ++j) {
      const auto si = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>(j);
      m.signal[si] += inten(i, j) * js.grid.idler.weight(sj);
      m.idler[sj] += inten(i, j) * js.grid.signal.weight(si);
    }
  }
  return m;
}

double fwhm_of_marginal(const std::vector<double>& intensity, const SpectralAxis& axis) {
  if (intensity.size() != axis.size()) throw DomainError("marginal length does not match axis");
  const auto peak_it = std::max_element(intensity.begin(), intensity.end());
  const auto peak = static_cast<std::size_t>(peak_it - intensity.begin());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) throw DegenerateInputError("marginal is identically zero");
  if (peak == 0 || peak + 1 == intensity.size()) throw EdgeError("marginal peak lies on the grid edge");

  std::size_t l = peak;
  while (l > 0 && intensity[l] > half) --l;
  if (intensity[l] > half) throw EdgeError("lower half-maximum crossing lies beyond the grid");
  std::size_t r = peak;
  while (r + 1 < intensity.size() && intensity[r] > half) ++r;
  if (intensity[r] > half) throw EdgeError("upper half-maximum crossing lies beyond the grid");

  const double tl = static_cast<double>(l) + (half - intensity[l]) / (intensity[l + 1] - intensity[l]);
  const double tr = static_cast<double>(r - 1) + (half - intensity[r - 1]) / (intensity[r] - intensity[r - 1]);
  return std::abs(angular_frequency_to_wavelength(axis.omega_at(tl)) -
                  angular_frequency_to_wavelength(axis.omega_at(tr)));
}

double peak_wavelength(const std::vector<double>& intensity, const SpectralAxis& axis) {
  if (intensity.size() != axis.size()) throw DomainError("marginal length does not match axis");
  const auto peak = static_cast<std::size_t>(std::max_element(intensity.begin(), intensity.end()) - intensity.begin());
  return axis.wavelength(peak);
}

double centroid_wavelength(const std::vector<double>& intensity, const SpectralAxis& axis) {
  if (intensity.size() != axis.size()) throw DomainError("marginal length does not match axis");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    num += intensity[i] * axis.omega(i) * axis.weight(i);
    den += intensity[i] * axis.weight(i);
  }
  if (!(den > 0.0)) throw DegenerateInputError("marginal is identically zero");
  return angular_frequency_to_wavelength(num / den);
}

namespace {

// Column j spreads sample j over the axis with a Gaussian of the given sigma;
// columns sum to 1 so the discrete mass is conserved.
Eigen::MatrixXd instrument_kernel(const SpectralAxis& axis, double resolution_nm) {
  const auto n = static_cast<Eigen::Index>(axis.size());
  if (resolution_nm == 0.0) return Eigen::MatrixXd::Identity(n, n);
  const double sigma = bandwidth_nm_to_rad_per_s(resolution_nm, axis.center_wavelength()) / kFwhmPerSigma;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double wj = axis.weight(static_cast<std::size_t>(j));
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (axis.omega(static_cast<std::size_t>(i)) - axis.omega(static_cast<std::size_t>(j))) / sigma;
      g(i, j) = std::exp(-0.5 * d * d);
      col += g(i, j) * axis.weight(static_cast<std::size_t>(i));
    }
    // sum_i g(i, j) w_i == w_j
    g.col(j) *= wj / col;
  }
  return g;
}

}  // namespace

JointSpectrum convolve_instrument(const JointSpectrum& js, double signal_resolution_nm, double idler_resolution_nm) {
  if (signal_resolution_nm < 0.0 || idler_resolution_nm < 0.0) throw DomainError("resolutions must be non-negative");
  if (signal_resolution_nm > js.grid.signal.span_nm()) {
    throw DomainError(fmt::format("signal resolution {} nm exceeds axis span {} nm", signal_resolution_nm,
                                  js.grid.signal.span_nm()));
  }
  if (idler_resolution_nm > js.grid.idler.span_nm()) {
    throw DomainError(fmt::format("idler resolution {} nm exceeds axis span {} nm", idler_resolution_nm,
                                  js.grid.idler.span_nm()));
  }
  const Eigen::MatrixXd gs = instrument_kernel(js.grid.signal, signal_resolution_nm);
  const Eigen::MatrixXd gi = instrument_kernel(js.grid.idler, idler_resolution_nm);
  const Eigen::MatrixXd out = gs * js.intensity() * gi.transpose();
  JointSpectrum result{js.grid, out.cast<std::complex<double>>(), SpectrumKind::intensity, js.normalized};
  return result;
}

std::string jsi_matrix_csv(const JointSpectrum& js) {
  const Eigen::MatrixXd inten = js.intensity();
  std::string out = "# joint spectral intensity; rows: signal wavelength (nm), columns: idler wavelength (nm)\n";
  out += "signal_nm";
  for (std::size_t j = 0; j < js.grid.idler.size(); ++j) out += "," + io::format_double(js.grid.idler.wavelength(j));
  out += '\n';
  for (Eigen::Index i = 0; i < inten.rows(); ++i) {
    out += io::format_double(js.grid.signal.wavelength(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < inten.cols(); ++j) out += "," + io::format_double(inten(i, j));
    out += '\n';
  }
  return out;
}

std::string jsi_long_csv(const JointSpectrum& js) {
  const Eigen::MatrixXd inten = js.intensity();
  std::string out = "signal_nm,idler_nm,intensity\n";
  for (Eigen::Index i = 0; i < inten.rows(); ++i) {
    const auto ls = io::format_double(js.grid.signal.wavelength(static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j < inten.cols(); ++j) {
      out += ls + "," + io::format_double(js.grid.idler.wavelength(static_cast<std::size_t>(j))) + "," +
             io::format_double(inten(i, j)) + "\n";
    }
  }
  return out;
}

std::string marginals_csv(const JointSpectrum& js) {
  const auto m = marginals(js);
  io::CsvTable table{{"axis", "wavelength_nm", "intensity"}, {}};
  for (std::size_t i = 0; i < m.signal.size(); ++i) table.rows.push_back({0.0, js.grid.signal.wavelength(i), m.signal[i]});
  for (std::size_t j = 0; j < m.idler.size(); ++j) table.rows.push_back({1.0, js.grid.idler.wavelength(j), m.idler[j]});
  return io::format_csv(table, {"axis 0 = signal, 1 = idler; intensity per rad/s"});
}

JointSpectrum parse_jsi_long_csv(const std::string& text, const std::string& source_name) {
  const auto table = io::parse_csv(text, source_name);
  const auto cs = table.column("signal_nm");
  const auto ci = table.column("idler_nm");
  const auto cv = table.column("intensity");
  std::map<double, std::size_t> signal_index, idler_index;
  for (const auto& row : table.rows) {
    signal_index.emplace(row[cs], 0);
    idler_index.emplace(row[ci], 0);
  }
  if (signal_index.size() < 2 || idler_index.size() < 2) {
    throw ConfigError(source_name + ": JSI needs at least two distinct wavelengths per axis");
  }
  if (table.rows.size() != signal_index.size() * idler_index.size()) {
    throw ConfigError(fmt::format("{}: {} rows do not form a rectangular {}x{} grid", source_name, table.rows.size(),
                                  signal_index.size(), idler_index.size()));
  }
  // Axes are ascending in omega, i.e. descending in wavelength.
  std::vector<double> sig_nm, idl_nm;
  std::size_t k = signal_index.size();
  for (auto& [nm, idx] : signal_index) {
    idx = --k;
    sig_nm.push_back(nm);
  }
  k = idler_index.size();
  for (auto& [nm, idx] : idler_index) {
    idx = --k;
    idl_nm.push_back(nm);
  }
  Grid2D grid{SpectralAxis::from_wavelengths(sig_nm), SpectralAxis::from_wavelengths(idl_nm)};
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Constant(static_cast<Eigen::Index>(sig_nm.size()),
                                                       static_cast<Eigen::Index>(idl_nm.size()), {-1.0, 0.0});
  for (const auto& row : table.rows) {
    const auto i = static_cast<Eigen::Index>(signal_index.at(row[cs]));
    const auto j = static_cast<Eigen::Index>(idler_index.at(row[ci]));
    if (values(i, j).real() >= 0.0) {
      throw ConfigError(fmt::format("{}: duplicate grid point ({}, {})", source_name, row[cs], row[ci]));
    }
    if (row[cv] < 0.0 || !std::isfinite(row[cv])) {
      throw ConfigError(fmt::format("{}: invalid intensity {} at ({}, {})", source_name, row[cv], row[cs], row[ci]));
    }
    values(i, j) = {row[cv], 0.0};
  }
  JointSpectrum js{std::move(grid), std::move(values), SpectrumKind::intensity, false};
  normalize(js);
  return js;
}

JointSpectrum read_jsi_long_csv(const std::filesystem::path& path) {
  return parse_jsi_long_csv(io::read_file(path), path.string());
}

}  // namespace fwm
