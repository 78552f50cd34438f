#include "fwm/phasematch.hpp"

#include "fwm/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

#include "fwm/error.hpp"
#include "fwm/spectral.hpp"

namespace fwm {

void FwmConfig::validate() const {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be non-negative");
  if (!(peak_pump_power >= 0.0)) throw DomainError("peak pump power must be non-negative");
  if (!(fiber_length > 0.0)) throw DomainError("fiber length must be positive");
  if (!(pump_center_nm > 0.0)) throw DomainError("pump centre must be positive");
  if (!(pump_fwhm_nm > 0.0)) throw DomainError("pump bandwidth must be positive");
}

double peak_power_from_average(double average_power_w, double repetition_rate_hz, double pulse_duration_s) {
  if (!(average_power_w >= 0.0) || !(repetition_rate_hz > 0.0) || !(pulse_duration_s > 0.0)) {
    throw DomainError("peak power needs non-negative average power and positive rate and duration");
  }
  return average_power_w / repetition_rate_hz / pulse_duration_s;
}

double delta_k(const DispersionProfile& profile, const FwmConfig& config, double omega_signal, double omega_idler) {
  const double omega_pump = 0.5 * (omega_signal + omega_idler);
  return 2.0 * profile.k(omega_pump) - 2.0 * config.gamma * config.peak_pump_power -
         (profile.k(omega_signal) + profile.k(omega_idler));
}

std::vector<double> phase_matched_detunings(const DispersionProfile& profile, const FwmConfig& config,
                                            double omega_pump, const ContourOptions& options) {
  if (!profile.contains(omega_pump)) {
    throw DomainError(fmt::format("pump {:.3f} nm outside profile domain", angular_frequency_to_wavelength(omega_pump)));
  }
  // pulled in by a hair so pump -/+ detuning cannot round past the domain edge
  const double max_detuning =
      std::min(omega_pump - profile.min_omega(), profile.max_omega() - omega_pump) * (1.0 - 1e-12);
  std::vector<double> roots;
  if (!(max_detuning > options.min_detuning) || options.scan_points < 2) return roots;

  auto mismatch = [&](double detuning) {
    return delta_k(profile, config, omega_pump + detuning, omega_pump - detuning);
  };
  const auto n = options.scan_points;
  const double step = (max_detuning - options.min_detuning) / static_cast<double>(n - 1);
  double prev_x = options.min_detuning;
  double prev_f = mismatch(prev_x);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = i + 1 == n ? max_detuning : options.min_detuning + step * static_cast<double>(i);
    const double f = mismatch(x);
    if (f == 0.0) {
      roots.push_back(x);
    } else if (prev_f != 0.0 && (prev_f < 0.0) != (f < 0.0)) {
      double lo = prev_x, hi = x, f_lo = prev_f;
      double best = 0.5 * (lo + hi);
      while (hi - lo > options.bracket_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = mismatch(mid);
        best = mid;
        if (std::abs(f_mid) < options.mismatch_tolerance) break;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
        best = 0.5 * (lo + hi);
      }
      roots.push_back(best);
    }
    prev_x = x;
    prev_f = f;
  }
  return roots;
}

std::vector<double> pump_wavelengths(double pump_min_nm, double pump_max_nm, std::size_t pump_steps) {
  if (pump_steps == 0) throw DomainError("pump range needs at least one step");
  if (!(pump_min_nm > 0.0) || pump_max_nm < pump_min_nm) throw DomainError("pump range needs 0 < min <= max");
  if (pump_steps > 1 && !(pump_max_nm > pump_min_nm)) throw DomainError("pump range is empty");
  std::vector<double> out(pump_steps);
  for (std::size_t i = 0; i < pump_steps; ++i) {
    out[i] = pump_steps == 1 ? pump_min_nm
                             : pump_min_nm + (pump_max_nm - pump_min_nm) * static_cast<double>(i) /
                                                 static_cast<double>(pump_steps - 1);
  }
  return out;
}

namespace {

std::vector<ContourPoint> contour_at(const DispersionProfile& profile, const FwmConfig& config, double pump_nm,
                                     const ContourOptions& options) {
  const double wp = wavelength_to_angular_frequency(pump_nm);
  std::vector<ContourPoint> points;
  for (double detuning : phase_matched_detunings(profile, config, wp, options)) {
    const double ws = wp + detuning;
    const double wi = wp - detuning;
    points.push_back({pump_nm, angular_frequency_to_wavelength(ws), angular_frequency_to_wavelength(wi),
                      delta_k(profile, config, ws, wi)});
  }
  return points;
}

void check_pump_range(const DispersionProfile& profile, double pump_min_nm, double pump_max_nm) {
  if (pump_min_nm < profile.min_wavelength() || pump_max_nm > profile.max_wavelength()) {
    throw DomainError(fmt::format("pump range [{}, {}] nm outside profile domain [{}, {}] nm", pump_min_nm,
                                  pump_max_nm, profile.min_wavelength(), profile.max_wavelength()));
  }
}

std::vector<ContourPoint> flatten(std::vector<std::vector<ContourPoint>>& per_pump) {
  std::vector<ContourPoint> out;
  for (auto& v : per_pump) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace

std::vector<ContourPoint> solve_contour(const DispersionProfile& profile, const FwmConfig& config, double pump_min_nm,
                                        double pump_max_nm, std::size_t pump_steps, const ContourOptions& options) {
  config.validate();
  check_pump_range(profile, pump_min_nm, pump_max_nm);
  const auto pumps = pump_wavelengths(pump_min_nm, pump_max_nm, pump_steps);
  std::vector<std::vector<ContourPoint>> per_pump(pumps.size());
  const auto count = static_cast<long>(pumps.size());
  LoopErrors errors;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    errors.run([&] {
      per_pump[static_cast<std::size_t>(i)] = contour_at(profile, config, pumps[static_cast<std::size_t>(i)], options);
    });
  }
  errors.rethrow();
  return flatten(per_pump);
}

std::vector<ContourPoint> solve_contour_serial(const DispersionProfile& profile, const FwmConfig& config,
                                               double pump_min_nm, double pump_max_nm, std::size_t pump_steps,
                                               const ContourOptions& options) {
  config.validate();
  check_pump_range(profile, pump_min_nm, pump_max_nm);
  std::vector<std::vector<ContourPoint>> per_pump;
  for (double pump : pump_wavelengths(pump_min_nm, pump_max_nm, pump_steps)) {
    per_pump.push_back(contour_at(profile, config, pump, options));
  }
  return flatten(per_pump);
}

GvMatch gv_matched_pump(const DispersionProfile& profile, const FwmConfig& config, double pump_min_nm,
                        double pump_max_nm, const ContourOptions& options) {
  config.validate();
  check_pump_range(profile, pump_min_nm, pump_max_nm);
  if (!(pump_min_nm < pump_max_nm)) throw DomainError("GV search needs pump_min < pump_max");

  struct Sample {
    double pump_nm;
    double omega_idler;
    double mismatch;
  };
  auto evaluate = [&](double pump_nm) -> std::optional<Sample> {
    const double wp = wavelength_to_angular_frequency(pump_nm);
    const auto roots = phase_matched_detunings(profile, config, wp, options);
    if (roots.empty()) return std::nullopt;
    const double wi = wp - roots.back();
    return Sample{pump_nm, wi, profile.beta1(wp) - profile.beta1(wi)};
  };

  auto lo = evaluate(pump_min_nm);
  auto hi = evaluate(pump_max_nm);
  if (!lo || !hi) throw NotFoundError("no phase-matched contour at the ends of the pump range");
  if (lo->mismatch == 0.0) hi = lo;
  if (hi->mismatch != 0.0 && (lo->mismatch < 0.0) == (hi->mismatch < 0.0)) {
    throw NotFoundError(fmt::format("pump/idler group-velocity difference does not change sign over [{}, {}] nm",
                                    pump_min_nm, pump_max_nm));
  }
  while (hi->mismatch != 0.0 && hi->pump_nm - lo->pump_nm > 1e-9) {
    const double mid_nm = 0.5 * (lo->pump_nm + hi->pump_nm);
    if (mid_nm <= lo->pump_nm || mid_nm >= hi->pump_nm) break;
    auto mid = evaluate(mid_nm);
    if (!mid) throw NotFoundError(fmt::format("contour vanishes at pump {} nm", mid_nm));
    if (mid->mismatch == 0.0 || (mid->mismatch < 0.0) == (lo->mismatch < 0.0)) {
      if (mid->mismatch == 0.0) hi = mid;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Sample& best = std::abs(lo->mismatch) <= std::abs(hi->mismatch) ? *lo : *hi;
  const double wp = wavelength_to_angular_frequency(best.pump_nm);
  return GvMatch{best.pump_nm, angular_frequency_to_wavelength(2.0 * wp - best.omega_idler),
                 angular_frequency_to_wavelength(best.omega_idler), best.mismatch};
}

}  // namespace fwm
