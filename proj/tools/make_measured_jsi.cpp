// Writes a coincidence-map style JSI: the model spectrum seen through the
// spectrometer resolutions, binned on a coarse grid, with an uncorrelated
// accidental floor and Poisson counting noise.
#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdio>
#include <random>

#include "fwm/dispersion.hpp"
#include "fwm/io.hpp"
#include "fwm/jsa.hpp"
#include "fwm/schmidt.hpp"

int main(int argc, char** argv) {
  using namespace fwm;
  CLI::App app{"coincidence-map JSI fixture generator"};
  std::size_t points = 32;
  double coincidences = 3000.0;
  double accidental_fraction = 100.0 / 1300.0;
  double signal_resolution = 0.7, idler_resolution = 24.0;
  std::uint64_t seed = 3;
  std::string out = "fig3_measured_jsi.csv";
  app.add_option("--points", points, "samples per axis");
  app.add_option("--coincidences", coincidences, "expected total counts");
  app.add_option("--accidental-fraction", accidental_fraction);
  app.add_option("--signal-resolution", signal_resolution, "nm");
  app.add_option("--idler-resolution", idler_resolution, "nm");
  app.add_option("--seed", seed);
  app.add_option("-o,--output", out);
  CLI11_PARSE(app, argc, argv);

  const Grid2D grid{SpectralAxis(507.0, 521.0, points), SpectralAxis(1470.0, 1630.0, points)};
  const auto model = build_jsa_serial(canonical_profile(), FwmConfig{}, PumpEnvelope{}, grid);
  const auto seen = convolve_instrument(model, signal_resolution, idler_resolution);
  const auto m = marginals(seen);

  const auto n = static_cast<Eigen::Index>(points);
  Eigen::MatrixXd expected(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
      expected(a, b) = ((1.0 - accidental_fraction) * seen.values(a, b).real() +
                        accidental_fraction * m.signal[ia] * m.idler[ib]) *
                       grid.cell_area(ia, ib);
    }
  }
  expected *= coincidences / expected.sum();

  std::mt19937_64 rng(seed);
  JointSpectrum counts{grid, Eigen::MatrixXcd(n, n), SpectrumKind::intensity, false};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      std::poisson_distribution<long> draw(expected(a, b));
      counts.values(a, b) = static_cast<double>(draw(rng));
    }
  }

  io::CsvTable table{{"signal_nm", "idler_nm", "intensity"}, {}};
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      table.rows.push_back({grid.signal.wavelength(static_cast<std::size_t>(a)),
                            grid.idler.wavelength(static_cast<std::size_t>(b)), counts.values(a, b).real()});
    }
  }
  io::write_file_atomic(out, io::format_csv(table, {fmt::format("coincidence counts, {} expected, seed {}",
                                                                 coincidences, seed)}));

  const auto r = decompose(read_jsi_long_csv(out), SchmidtSource::sqrt_of_intensity);
  std::printf("K %.4f purity %.4f\n", r.schmidt_number, r.purity);
  return 0;
}
