#include "fwm/schmidt.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "fwm/error.hpp"
#include "fwm/io.hpp"

namespace fwm {

Eigen::MatrixXcd schmidt_input(const JointSpectrum& js, SchmidtSource source) {
  if (source == SchmidtSource::amplitude) {
    if (js.kind != SpectrumKind::amplitude) {
      throw DomainError("amplitude decomposition needs an amplitude spectrum; use sqrt_of_intensity");
    }
    return js.values;
  }
  return js.intensity().cwiseMax(0.0).cwiseSqrt().cast<std::complex<double>>();
}

double schmidt_number(const std::vector<double>& coefficients) {
  double sum_sq = 0.0;
  for (double l : coefficients) sum_sq += l * l;
  if (!(sum_sq > 0.0)) throw DegenerateInputError("Schmidt coefficients are all zero");
  return 1.0 / sum_sq;
}

double purity(const SchmidtResult& result) { return 1.0 / result.schmidt_number; }

namespace {

template <typename Matrix>
void fill_from_svd(const Matrix& weighted, const Eigen::VectorXd& ws, const Eigen::VectorXd& wi,
                   std::size_t modes_to_keep, SchmidtResult& out) {
  Eigen::BDCSVD<Matrix> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double total = sv.squaredNorm();
  if (!(total > 0.0)) throw DegenerateInputError("cannot decompose an all-zero joint spectrum");
  out.norm = std::sqrt(total);
  out.coefficients.resize(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index n = 0; n < sv.size(); ++n) out.coefficients[static_cast<std::size_t>(n)] = sv[n] * sv[n] / total;
  out.schmidt_number = schmidt_number(out.coefficients);
  out.purity = 1.0 / out.schmidt_number;

  const auto keep = static_cast<Eigen::Index>(std::min<std::size_t>(modes_to_keep, static_cast<std::size_t>(sv.size())));
  const Eigen::VectorXd inv_sqrt_ws = ws.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd inv_sqrt_wi = wi.cwiseSqrt().cwiseInverse();
  out.signal_modes = (inv_sqrt_ws.asDiagonal() * svd.matrixU().leftCols(keep)).template cast<std::complex<double>>();
  out.idler_modes =
      (inv_sqrt_wi.asDiagonal() * svd.matrixV().leftCols(keep).conjugate()).template cast<std::complex<double>>();
}

}  // namespace

SchmidtResult decompose(const JointSpectrum& js, SchmidtSource source, std::size_t modes_to_keep) {
  const Eigen::MatrixXcd input = schmidt_input(js, source);
  if (input.size() == 0 || input.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateInputError("cannot decompose an all-zero joint spectrum");
  }
  const Eigen::Map<const Eigen::VectorXd> ws(js.grid.signal.weights().data(),
                                             static_cast<Eigen::Index>(js.grid.signal.size()));
  const Eigen::Map<const Eigen::VectorXd> wi(js.grid.idler.weights().data(),
                                             static_cast<Eigen::Index>(js.grid.idler.size()));
  const Eigen::VectorXd sqrt_ws = ws.cwiseSqrt();
  const Eigen::VectorXd sqrt_wi = wi.cwiseSqrt();

  SchmidtResult out{{}, 1.0, 1.0, {}, {}, 1.0, js.grid};
  const bool real_input = input.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real_input) {
    const Eigen::MatrixXd weighted = sqrt_ws.asDiagonal() * input.real() * sqrt_wi.asDiagonal();
    fill_from_svd(weighted, ws, wi, modes_to_keep, out);
  } else {
    const Eigen::MatrixXcd weighted = sqrt_ws.cast<std::complex<double>>().asDiagonal() * input *
                                      sqrt_wi.cast<std::complex<double>>().asDiagonal();
    fill_from_svd(weighted, ws, wi, modes_to_keep, out);
  }
  return out;
}

Eigen::MatrixXcd reconstruct(const SchmidtResult& result, std::size_t n_modes) {
  if (n_modes > result.modes_stored()) {
    throw RangeError(fmt::format("requested {} modes but only {} are stored", n_modes, result.modes_stored()));
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(result.signal_modes.rows(), result.idler_modes.rows());
  for (std::size_t n = 0; n < n_modes; ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    out += (result.norm * std::sqrt(result.coefficients[n])) * result.signal_modes.col(c) *
           result.idler_modes.col(c).transpose();
  }
  return out;
}

std::string schmidt_report_json(const SchmidtResult& result) {
  nlohmann::json j;
  j["lambda"] = result.coefficients;
  j["K"] = result.schmidt_number;
  j["purity"] = result.purity;
  j["n_modes_stored"] = result.modes_stored();
  return j.dump(2) + "\n";
}

std::string schmidt_modes_csv(const SchmidtResult& result, bool signal_side) {
  const auto& modes = signal_side ? result.signal_modes : result.idler_modes;
  const auto& axis = signal_side ? result.grid.signal : result.grid.idler;
  io::CsvTable table;
  table.header.push_back("wavelength_nm");
  for (Eigen::Index n = 0; n < modes.cols(); ++n) {
    table.header.push_back(fmt::format("mode{}_re", n));
    table.header.push_back(fmt::format("mode{}_im", n));
  }
  for (Eigen::Index i = 0; i < modes.rows(); ++i) {
    std::vector<double> row{axis.wavelength(static_cast<std::size_t>(i))};
    for (Eigen::Index n = 0; n < modes.cols(); ++n) {
      row.push_back(modes(i, n).real());
      row.push_back(modes(i, n).imag());
    }
    table.rows.push_back(std::move(row));
  }
  return io::format_csv(table, {signal_side ? "signal Schmidt modes" : "idler Schmidt modes",
                                "orthonormal under d(omega) quadrature, units (rad/s)^-1/2"});
}

}  // namespace fwm
