#include <CLI11.hpp>
#include <fmt/core.h>

#include <map>
#include <ostream>

#include "fwm/cli/app.hpp"
#include "fwm/error.hpp"
#include "fwm/parallel.hpp"

namespace fwm::cli {

namespace {

void print_outputs(std::ostream& out, const CommandResult& r) {
  for (const auto& p : r.outputs) out << "wrote " << p.string() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon-pair source simulator: dispersion, phase matching, joint spectra, Schmidt analysis and "
               "photon counting"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "fwm_out";
  app.add_option("--config", config_path, "flat JSON config with dotted keys");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  // --seed and --threads are the global spellings of run.seed / run.threads;
  // every other key gets its kebab-case flag.
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_schema()) {
    std::string flag = key.name == "run.seed" ? "seed" : key.name == "run.threads" ? "threads" : flag_name(key.name);
    auto* opt = app.add_option("--" + flag, overrides[key.name], key.help);
    opt->group(key.name.substr(0, key.name.find('.')));
    options[key.name] = opt;
  }

  const char* names[] = {"dispersion", "phasematch", "jsa-schmidt", "counting", "reproduce-paper"};
  const char* help[] = {"D(lambda) curve and zero-dispersion wavelengths",
                        "phase-matching contour and group-velocity-matched pump",
                        "joint spectrum, instrument convolution, marginals and Schmidt decomposition",
                        "photon statistics, conditional clicks, Monte Carlo and rate report",
                        "run every command and compare with the published numbers"};
  for (std::size_t i = 0; i < std::size(names); ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) cfg.set_from_string(key, overrides[key]);
    }
    set_default_threads(static_cast<int>(cfg.integer("run.threads")));

    if (command == "dispersion") {
      print_outputs(out, cmd_dispersion(cfg, out_dir));
    } else if (command == "phasematch") {
      print_outputs(out, cmd_phasematch(cfg, out_dir));
    } else if (command == "jsa-schmidt") {
      print_outputs(out, cmd_jsa_schmidt(cfg, out_dir));
    } else if (command == "counting") {
      print_outputs(out, cmd_counting(cfg, out_dir));
    } else {
      out << format_summary_table(cmd_reproduce_paper(cfg, out_dir));
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "fwmsim " << command << ": configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "fwmsim " << command << ": " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "fwmsim " << command << ": " << e.what() << "\n";
    return kExitInfeasible;
  }
}

}  // namespace fwm::cli
