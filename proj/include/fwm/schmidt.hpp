#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

#include "fwm/jsa.hpp"

namespace fwm {

enum class SchmidtSource {
  amplitude,          // decompose the complex JSA as is
  sqrt_of_intensity,  // decompose sqrt(|f|^2), i.e. assume a flat phase
};

inline constexpr std::size_t kDefaultModesKept = 16;

struct SchmidtResult {
  std::vector<double> coefficients;  // lambda_n, descending, sum 1
  double schmidt_number = 1.0;       // K = 1 / sum lambda_n^2
  double purity = 1.0;               // 1 / K
  // Columns are mode functions sampled on the grid, orthonormal under the
  // axis quadrature weights.
  Eigen::MatrixXcd signal_modes;
  Eigen::MatrixXcd idler_modes;
  // sqrt of the decomposed matrix's quadrature norm; reconstruct() multiplies
  // by it so a full reconstruction returns the input values.
  double norm = 1.0;
  Grid2D grid;

  std::size_t modes_stored() const { return static_cast<std::size_t>(signal_modes.cols()); }
};

/// Singular value decomposition of the quadrature-weighted matrix
/// f_ij sqrt(w_i w_j). Throws DegenerateInputError on an all-zero input.
SchmidtResult decompose(const JointSpectrum& js, SchmidtSource source, std::size_t modes_to_keep = kDefaultModesKept);

double purity(const SchmidtResult& result);
double schmidt_number(const std::vector<double>& coefficients);

/// sum_{n < n_modes} sqrt(lambda_n) xi_n(ws) chi_n(wi), scaled back to the
/// decomposed input. Throws RangeError when n_modes exceeds the stored modes.
Eigen::MatrixXcd reconstruct(const SchmidtResult& result, std::size_t n_modes);

/// The matrix decompose() factors for `source`, before quadrature weighting.
Eigen::MatrixXcd schmidt_input(const JointSpectrum& js, SchmidtSource source);

/// {"lambda": [...], "K": ..., "purity": ..., "n_modes_stored": ...}
std::string schmidt_report_json(const SchmidtResult& result);
/// One row per sample: wavelength_nm, then re/im of each stored mode.
std::string schmidt_modes_csv(const SchmidtResult& result, bool signal_side);

}  // namespace fwm
