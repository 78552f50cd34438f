#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fwm/dispersion.hpp"
#include "fwm/error.hpp"
#include "fwm/io.hpp"
#include "fwm/jsa.hpp"
#include "fwm/spectral.hpp"
#include "oracles/oracles.hpp"

using namespace fwm;

namespace {

Grid2D default_grid(std::size_t n = 512) { return {SpectralAxis(507.0, 521.0, n), SpectralAxis(1470.0, 1630.0, n)}; }

FwmConfig model_config() {
  FwmConfig cfg;
  cfg.peak_pump_power = 0.0;
  return cfg;
}

PumpEnvelope pump(double fwhm_nm = 3.0) {
  PumpEnvelope e;
  e.fwhm_nm = fwhm_nm;
  return e;
}

const JointSpectrum& model() {
  static const JointSpectrum js = build_jsa(canonical_profile(), model_config(), pump(), default_grid());
  return js;
}

double integral(const std::vector<double>& v, const SpectralAxis& axis) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * axis.weight(i);
  return s;
}

// Separable Gaussian intensity, Gaussian in wavelength along each axis.
JointSpectrum gaussian_jsi(const Grid2D& grid, double sig_center, double sig_fwhm, double idl_center,
                           double idl_fwhm) {
  JointSpectrum js{grid, Eigen::MatrixXcd(grid.signal.size(), grid.idler.size()), SpectrumKind::intensity, false};
  const double ss = sig_fwhm / kFwhmPerSigma, si = idl_fwhm / kFwhmPerSigma;
  for (std::size_t a = 0; a < grid.signal.size(); ++a) {
    const double xs = (grid.signal.wavelength(a) - sig_center) / ss;
    for (std::size_t b = 0; b < grid.idler.size(); ++b) {
      const double xi = (grid.idler.wavelength(b) - idl_center) / si;
      js.values(a, b) = std::exp(-0.5 * (xs * xs + xi * xi));
    }
  }
  normalize(js);
  return js;
}

}  // namespace

TEST(Sinc, Values) {
  EXPECT_EQ(sinc(0.0), 1.0);
  EXPECT_NEAR(sinc(std::numbers::pi), 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(sinc(0.5), std::sin(0.5) / 0.5);
  EXPECT_EQ(sinc(-1.3), sinc(1.3));
}

TEST(Sinc, DoublingLengthHalvesFirstZero) {
  const double L = 0.65;
  const double zero_L = 2.0 * std::numbers::pi / L;
  EXPECT_NEAR(sinc(zero_L * L / 2.0), 0.0, 1e-15);
  EXPECT_NEAR(sinc(0.5 * zero_L * (2.0 * L) / 2.0), 0.0, 1e-15);
  EXPECT_GT(std::abs(sinc(0.5 * zero_L * L / 2.0)), 0.5);
}

TEST(Envelope, TwoPhotonWidthIsRootTwoWider) {
  PumpEnvelope e = pump(3.0);
  const double wp0 = wavelength_to_angular_frequency(771.0);
  const double sigma_pump_intensity = bandwidth_nm_to_rad_per_s(3.0, 771.0) / kFwhmPerSigma;
  // |alpha|^2 at one intensity-sigma of the sum coordinate, sqrt(2) wider
  const double x = std::sqrt(2.0) * sigma_pump_intensity;
  const double a = e.two_photon_amplitude(2.0 * wp0 + x);
  EXPECT_NEAR(a * a, std::exp(-0.5), 1e-12);
  EXPECT_DOUBLE_EQ(e.two_photon_amplitude(2.0 * wp0), 1.0);
}

TEST(Build, NormalizedWithMatchingDimensions) {
  const auto& js = model();
  EXPECT_EQ(js.values.rows(), 512);
  EXPECT_EQ(js.values.cols(), 512);
  EXPECT_TRUE(js.normalized);
  EXPECT_NEAR(js.total(), 1.0, 1e-9);
}

TEST(Build, MatchesDirectFormula) {
  const auto& p = canonical_profile();
  const auto& js = model();
  const auto& b = p.beta_coefficients();
  const long double w0 = p.reference_frequency();
  const long double wp0 = oracle::omega_of_nm(771.0L);
  const long double sig_i = (oracle::omega_of_nm(771.0L - 1.5L) - oracle::omega_of_nm(771.0L + 1.5L)) /
                            (2.0L * std::sqrt(2.0L * std::log(2.0L)));
  auto cell = [&](std::size_t a, std::size_t c) {
    const long double ws = js.grid.signal.omega(a), wi = js.grid.idler.omega(c);
    const long double wp = 0.5L * (ws + wi);
    const long double dk = 2.0L * oracle::taylor_k(b, w0, wp) - oracle::taylor_k(b, w0, ws) - oracle::taylor_k(b, w0, wi);
    const long double s = ws + wi - 2.0L * wp0;
    const long double alpha = std::exp(-s * s / (8.0L * sig_i * sig_i));
    const long double x = dk * 0.65L / 2.0L;
    return static_cast<double>(alpha * (x == 0 ? 1.0L : std::sin(x) / x));
  };
  // ratio against a reference cell removes the normalization
  const std::size_t ra = 256, rc = 256;
  const double ref_model = js.values(ra, rc).real();
  const double ref_oracle = cell(ra, rc);
  for (std::size_t a : {10u, 200u, 256u, 300u, 500u}) {
    for (std::size_t c : {5u, 128u, 256u, 400u, 511u}) {
      const double expect = cell(a, c) / ref_oracle;
      const double got = js.values(a, c).real() / ref_model;
      EXPECT_NEAR(got, expect, 1e-6 * std::max(1.0, std::abs(expect))) << a << "," << c;
      EXPECT_EQ(js.values(a, c).imag(), 0.0);
    }
  }
}

TEST(Build, GridOutsideDomainThrows) {
  const Grid2D bad{SpectralAxis(440.0, 460.0, 16), SpectralAxis(1470.0, 1630.0, 16)};
  EXPECT_THROW(build_jsa(canonical_profile(), model_config(), pump(), bad), DomainError);
}

TEST(Marginals, IntegrateToOne) {
  const auto& js = model();
  const auto m = marginals(js);
  EXPECT_NEAR(integral(m.signal, js.grid.signal), 1.0, 1e-9);
  EXPECT_NEAR(integral(m.idler, js.grid.idler), 1.0, 1e-9);
}

TEST(Marginals, CentredOnDesignWavelengths) {
  const auto& js = model();
  const auto m = marginals(js);
  const double ds = 14.0 / 511.0, di = 160.0 / 511.0;
  EXPECT_NEAR(peak_wavelength(m.signal, js.grid.signal), 514.0, 0.5 + ds);
  EXPECT_NEAR(peak_wavelength(m.idler, js.grid.idler), 1542.0, 5.0 + di);
}

TEST(Marginals, PeakMatchesBruteForceRowSums) {
  const auto& js = model();
  const Eigen::MatrixXd I = js.intensity();
  Eigen::Index best_row = 0, best_col = 0;
  double best = -1.0;
  for (Eigen::Index a = 0; a < I.rows(); ++a) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < I.cols(); ++c) s += I(a, c) * js.grid.idler.weight(static_cast<std::size_t>(c));
    if (s > best) best = s, best_row = a;
  }
  best = -1.0;
  for (Eigen::Index c = 0; c < I.cols(); ++c) {
    double s = 0.0;
    for (Eigen::Index a = 0; a < I.rows(); ++a) s += I(a, c) * js.grid.signal.weight(static_cast<std::size_t>(a));
    if (s > best) best = s, best_col = c;
  }
  const auto m = marginals(js);
  EXPECT_DOUBLE_EQ(peak_wavelength(m.signal, js.grid.signal), js.grid.signal.wavelength(static_cast<std::size_t>(best_row)));
  EXPECT_DOUBLE_EQ(peak_wavelength(m.idler, js.grid.idler), js.grid.idler.wavelength(static_cast<std::size_t>(best_col)));
}

TEST(Marginals, SeparableFactorsRecovered) {
  const Grid2D grid{SpectralAxis(500.0, 530.0, 64), SpectralAxis(1400.0, 1700.0, 48)};
  JointSpectrum js{grid, Eigen::MatrixXcd(64, 48), SpectrumKind::amplitude, false};
  std::vector<double> g(64), h(48);
  for (std::size_t a = 0; a < 64; ++a) g[a] = 1.0 + std::sin(0.1 * static_cast<double>(a));
  for (std::size_t c = 0; c < 48; ++c) h[c] = std::exp(-0.01 * (static_cast<double>(c) - 20.0) * (static_cast<double>(c) - 20.0));
  for (std::size_t a = 0; a < 64; ++a)
    for (std::size_t c = 0; c < 48; ++c) js.values(a, c) = std::complex<double>(0.0, g[a] * h[c]);
  normalize(js);
  const auto m = marginals(js);
  std::vector<double> g2(64), h2(48);
  for (std::size_t a = 0; a < 64; ++a) g2[a] = g[a] * g[a];
  for (std::size_t c = 0; c < 48; ++c) h2[c] = h[c] * h[c];
  const double ng = integral(g2, grid.signal), nh = integral(h2, grid.idler);
  for (std::size_t a = 0; a < 64; ++a) EXPECT_NEAR(m.signal[a], g2[a] / ng, 1e-12 * (1.0 + g2[a] / ng));
  for (std::size_t c = 0; c < 48; ++c) EXPECT_NEAR(m.idler[c], h2[c] / nh, 1e-9 * (1.0 + h2[c] / nh));
}

TEST(Fwhm, GaussianWithinOneStep) {
  for (double sigma : {0.3, 1.0, 4.0}) {
    const SpectralAxis axis(480.0, 540.0, 801);
    std::vector<double> v(axis.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = (axis.wavelength(i) - 510.0) / sigma;
      v[i] = std::exp(-0.5 * x * x);
    }
    const double step = 60.0 / 800.0 * 1.1;  // wavelength step varies slightly across the axis
    EXPECT_NEAR(fwhm_of_marginal(v, axis), kFwhmPerSigma * sigma, step) << sigma;
  }
}

TEST(Fwhm, TopHatWithinOneStep) {
  const SpectralAxis axis(1400.0, 1700.0, 601);
  std::vector<double> v(axis.size());
  for (double width : {10.0, 37.0, 120.0}) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(axis.wavelength(i) - 1550.0) < width / 2 ? 1.0 : 0.0;
    EXPECT_NEAR(fwhm_of_marginal(v, axis), width, 300.0 / 600.0 * 1.2) << width;
  }
}

TEST(Fwhm, EdgeErrors) {
  const SpectralAxis axis(500.0, 520.0, 101);
  std::vector<double> v(axis.size(), 0.0);
  v.front() = 1.0;
  EXPECT_THROW(fwhm_of_marginal(v, axis), EdgeError);
  std::vector<double> wide(axis.size(), 1.0);
  wide[50] = 1.1;
  EXPECT_THROW(fwhm_of_marginal(wide, axis), EdgeError);
  EXPECT_THROW(fwhm_of_marginal(std::vector<double>(axis.size(), 0.0), axis), DegenerateInputError);
}

TEST(Fwhm, ModelSignalNearReportedWidth) {
  const auto m = marginals(model());
  EXPECT_NEAR(fwhm_of_marginal(m.signal, model().grid.signal), 1.2, 0.25 * 1.2);
}

TEST(Fwhm, StableUnderGridRefinement) {
  const auto coarse = build_jsa(canonical_profile(), model_config(), pump(), default_grid(256));
  const auto mc = marginals(coarse);
  const auto mf = marginals(model());
  const double sc = fwhm_of_marginal(mc.signal, coarse.grid.signal), sf = fwhm_of_marginal(mf.signal, model().grid.signal);
  const double ic = fwhm_of_marginal(mc.idler, coarse.grid.idler), ifn = fwhm_of_marginal(mf.idler, model().grid.idler);
  EXPECT_LT(std::abs(sc - sf) / sf, 0.01);
  EXPECT_LT(std::abs(ic - ifn) / ifn, 0.01);
}

TEST(Envelope, NarrowbandPumpCollapsesTowardAntiDiagonal) {
  // Width of the distribution of ws + wi shrinks monotonically with pump bandwidth.
  auto sum_spread = [](double fwhm_nm) {
    const auto js = build_jsa(canonical_profile(), model_config(), pump(fwhm_nm), default_grid(192));
    const Eigen::MatrixXd I = js.intensity();
    double m1 = 0.0, m2 = 0.0, tot = 0.0;
    for (Eigen::Index a = 0; a < I.rows(); ++a) {
      for (Eigen::Index c = 0; c < I.cols(); ++c) {
        const double wgt = I(a, c) * js.grid.cell_area(static_cast<std::size_t>(a), static_cast<std::size_t>(c));
        const double s = js.grid.signal.omega(static_cast<std::size_t>(a)) + js.grid.idler.omega(static_cast<std::size_t>(c));
        tot += wgt, m1 += wgt * s, m2 += wgt * s * s;
      }
    }
    m1 /= tot;
    return std::sqrt(std::max(0.0, m2 / tot - m1 * m1));
  };
  double prev = sum_spread(3.0);
  for (double fwhm : {1.0, 0.3, 0.1}) {
    const double s = sum_spread(fwhm);
    EXPECT_LT(s, prev) << fwhm;
    prev = s;
  }
}

TEST(Normalize, ZeroSpectrumIsDegenerate) {
  const Grid2D grid{SpectralAxis(500.0, 520.0, 8), SpectralAxis(1500.0, 1600.0, 8)};
  JointSpectrum js{grid, Eigen::MatrixXcd::Zero(8, 8), SpectrumKind::amplitude, false};
  EXPECT_THROW(normalize(js), DegenerateInputError);
}

TEST(Instrument, ZeroResolutionIsIdentity) {
  const auto& js = model();
  const auto out = convolve_instrument(js, 0.0, 0.0);
  EXPECT_EQ(out.kind, SpectrumKind::intensity);
  const Eigen::MatrixXd I = js.intensity();
  EXPECT_LT((out.values.real() - I).cwiseAbs().maxCoeff(), 1e-15 * I.maxCoeff());
}

TEST(Instrument, PreservesNormalization) {
  const auto out = convolve_instrument(model(), 0.7, 24.0);
  EXPECT_NEAR(out.total(), 1.0, 1e-6);
  EXPECT_GE(out.values.real().minCoeff(), 0.0);
}

TEST(Instrument, GaussianWidthsAddInQuadrature) {
  const Grid2D grid{SpectralAxis(504.0, 524.0, 801), SpectralAxis(1350.0, 1750.0, 801)};
  const auto js = gaussian_jsi(grid, 514.0, 1.2, 1542.0, 35.0);
  const auto out = convolve_instrument(js, 0.7, 24.0);
  const auto m = marginals(out);
  EXPECT_NEAR(fwhm_of_marginal(m.signal, grid.signal), std::hypot(1.2, 0.7), 0.01);
  EXPECT_NEAR(fwhm_of_marginal(m.signal, grid.signal), 1.4, 0.05);
  // the kernel is Gaussian in frequency, so far from the centre it is only
  // approximately Gaussian in wavelength
  EXPECT_NEAR(fwhm_of_marginal(m.idler, grid.idler), std::hypot(35.0, 24.0), 0.5);
  EXPECT_NEAR(fwhm_of_marginal(m.idler, grid.idler), 42.5, 0.6);
}

TEST(Instrument, ResolutionWiderThanAxisFails) {
  EXPECT_THROW(convolve_instrument(model(), 20.0, 24.0), DomainError);
  EXPECT_THROW(convolve_instrument(model(), 0.7, 200.0), DomainError);
  EXPECT_THROW(convolve_instrument(model(), -0.1, 24.0), DomainError);
}

TEST(Export, LongCsvRoundTrip) {
  const auto js = build_jsa(canonical_profile(), model_config(), pump(), default_grid(24));
  const auto back = parse_jsi_long_csv(jsi_long_csv(js));
  ASSERT_EQ(back.values.rows(), 24);
  ASSERT_EQ(back.values.cols(), 24);
  EXPECT_EQ(back.kind, SpectrumKind::intensity);
  const Eigen::MatrixXd I = js.intensity();
  EXPECT_LT((back.values.real() - I).cwiseAbs().maxCoeff(), 1e-9 * I.maxCoeff());
  for (std::size_t i = 0; i < 24; ++i) {
    EXPECT_NEAR(back.grid.signal.wavelength(i), js.grid.signal.wavelength(i), 1e-9);
    EXPECT_NEAR(back.grid.idler.wavelength(i), js.grid.idler.wavelength(i), 1e-9);
  }
}

TEST(Export, MatrixAndMarginalCsvParse) {
  const auto js = build_jsa(canonical_profile(), model_config(), pump(), default_grid(16));
  const auto mat = io::parse_csv(jsi_matrix_csv(js));
  EXPECT_EQ(mat.rows.size(), 16u);
  EXPECT_EQ(mat.header.size(), 17u);
  const auto marg = io::parse_csv(marginals_csv(js));
  EXPECT_EQ(marg.rows.size(), 32u);
  EXPECT_EQ(marg.header.size(), 3u);
}

TEST(Export, ImportRejectsMalformedGrids) {
  EXPECT_THROW(parse_jsi_long_csv("signal_nm,idler_nm,intensity\n514,1540,1\n514,1541,1\n515,1540,1\n"), ConfigError);
  EXPECT_THROW(parse_jsi_long_csv("signal_nm,idler_nm,intensity\n514,1540,1\n514,1540,1\n515,1540,1\n515,1541,1\n"),
               ConfigError);
  EXPECT_THROW(parse_jsi_long_csv("signal_nm,idler_nm,intensity\n514,1540,1\n514,1541,-1\n515,1540,1\n515,1541,1\n"),
               ConfigError);
}
