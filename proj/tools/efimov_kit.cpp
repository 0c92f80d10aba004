#include "efimov/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace efimov;

namespace {

int emit(const cli::CommandResult &r, const std::string &command,
         const std::string &hash, const std::string &out_path) {
  for (const auto &w : r.warnings)
    std::cerr << "warning: " << w << '\n';
  for (const auto &s : r.summary)
    std::cerr << s << '\n';
  if (out_path.empty() || out_path == "-") {
    io::write_csv(std::cout, r.table, command, hash);
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return cli::kUsage;
    }
    io::write_csv(f, r.table, command, hash);
  }
  return r.exit_code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Three-body adiabatic channel toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("efimov-kit ") + io::kVersion);

  std::string config, out;
  double rho = 0.0;
  double dB = 0.0, dmu = 0.0, abg = 0.0, mass = 0.0;

  auto *constants = app.add_subcommand("constants", "universal constants s0, lambda0, c0, M0");
  constants->add_option("-o,--output", out, "CSV output path (default stdout)");

  auto *params = app.add_subcommand("params", "two-body low-energy parameters");
  params->add_option("-c,--config", config, "config file")->required();
  params->add_option("-o,--output", out, "CSV output path (default stdout)");

  auto *scan = app.add_subcommand("scan", "lowest channel eigenvalue over the rho grid");
  scan->add_option("-c,--config", config, "config file")->required();
  scan->add_option("-o,--output", out, "CSV output path (default [scan] output or stdout)");

  auto *veff = app.add_subcommand("veff", "effective hyperradial potential");
  veff->add_option("-c,--config", config, "config file")->required();
  veff->add_option("-o,--output", out, "CSV output path (default [scan] output or stdout)");

  auto *direct = app.add_subcommand("direct", "direct angular eigenvalues at one rho");
  direct->add_option("-c,--config", config, "config file")->required();
  direct->add_option("--rho", rho, "hyperradius, r0 units")->required();
  direct->add_option("-o,--output", out, "CSV output path (default stdout)");

  auto *qscan = app.add_subcommand("qscan", "non-adiabatic term over the rho grid");
  qscan->add_option("-c,--config", config, "config file")->required();
  qscan->add_option("-o,--output", out, "CSV output path (default stdout)");

  auto *fesh = app.add_subcommand("feshbach", "effective range of a narrow Feshbach resonance");
  fesh->add_option("--dB", dB, "resonance width, mG")->required();
  fesh->add_option("--dmu", dmu, "magnetic moment difference, Bohr magnetons")->required();
  fesh->add_option("--abg", abg, "background scattering length, Bohr radii")->required();
  fesh->add_option("--mass", mass, "atom mass, u")->required();
  fesh->add_option("-o,--output", out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  try {
    if (constants->parsed())
      return emit(cli::cmd_constants(), "constants", "", out);
    if (fesh->parsed())
      return emit(cli::cmd_feshbach(dB, dmu, abg, mass), "feshbach", "", out);

    const auto cfg = io::load_config(config);
    if (out.empty() && (scan->parsed() || veff->parsed()))
      out = cfg.scan.output;
    if (params->parsed())
      return emit(cli::cmd_params(cfg), "params", cfg.hash, out);
    if (scan->parsed())
      return emit(cli::cmd_scan(cfg), "scan", cfg.hash, out);
    if (veff->parsed())
      return emit(cli::cmd_veff(cfg), "veff", cfg.hash, out);
    if (direct->parsed())
      return emit(cli::cmd_direct(cfg, rho), "direct", cfg.hash, out);
    if (qscan->parsed())
      return emit(cli::cmd_qscan(cfg), "qscan", cfg.hash, out);
  } catch (const io::ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::ZeroInput ||
                       e.code() == ErrorCode::InvalidArgument ||
                       e.code() == ErrorCode::RhoTooSmall;
    return usage ? cli::kUsage : cli::kFailure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kFailure;
  }
  return cli::kUsage;
}
