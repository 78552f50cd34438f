#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fwm/cli/config.hpp"

namespace fwm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;

struct CommandResult {
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

// Each command writes its artifacts plus manifest.json into out_dir.
CommandResult cmd_dispersion(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_phasematch(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_jsa_schmidt(const RunConfig& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_counting(const RunConfig& cfg, const std::filesystem::path& out_dir);

struct SummaryRow {
  std::string quantity;
  double value;
  double paper;
  double tolerance;     // absolute, or a factor when `ratio` is set
  bool ratio = false;   // pass when paper/tolerance <= value <= paper*tolerance
  std::string note;

  // Rows without a published value (paper is NaN) always pass.
  bool within() const;
};

/// Runs the four commands into subdirectories of out_dir and compares the
/// reproduced quantities with the published ones.
std::vector<SummaryRow> cmd_reproduce_paper(const RunConfig& cfg, const std::filesystem::path& out_dir);

std::string format_summary_table(const std::vector<SummaryRow>& rows);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fwm::cli
