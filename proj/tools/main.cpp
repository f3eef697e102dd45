#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cli.hpp"
#include "tripent/errors.hpp"

namespace {

using tripent::Json;
namespace cli = tripent::cli;

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kValidation = 3 };

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

Json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw tripent::ConfigError("cannot read " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw tripent::ConfigError(file.string() + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclear-spin entanglement via a spin-1 optical mediator: spectra, decay, protocols, sweeps."};
  app.require_subcommand(1);
  std::string config, out, figure;
  std::optional<long> seed, jobs;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "Excited-manifold energies, couplings and optical transitions"},
      {"entangling-power", "Entangling power of an excited-block propagator, analytic and Monte Carlo"},
      {"decay", "Radiative-decay trajectory of a chosen initial state"},
      {"protocol", "Run one entangling protocol and report EF and fidelity"},
      {"sweep", "Grid sweep of a protocol or of the entangling power"},
      {"figure", "Regenerate the data behind a named figure"},
      {"validate", "Check parameters and report regime and transitions"}};
  for (const auto& [c, help] : commands) {
    CLI::App* sub = app.add_subcommand(c, help);
    if (c == "figure") sub->add_option("name", figure, "fig4, fig5, fig6, fig7, fig8-demo, fig9, fig11 or fig12")->required();
    sub->add_option("--config", config, std::string("JSON run config; defaults to $") + cli::kConfigDirEnv + "/<command>.json");
    auto* o = sub->add_option("--out", out, "Output directory");
    if (c != "validate") o->required();
    sub->add_option("--seed", seed, "Random seed (overrides the config)")->check(CLI::NonNegativeNumber);
    sub->add_option("--jobs", jobs, "Worker threads; 0 uses all cores")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), kUsage);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const bool validating = command == "validate";
    cli::RunConfig cfg = cli::parse_run_config(load_json(cli::resolve_config_path(config, command)), command, !validating);
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (jobs) cfg.jobs = static_cast<int>(*jobs);
    cfg.out = out;
    if (!out.empty()) std::filesystem::create_directories(cfg.out);

    Json summary;
    if (validating) {
      auto [report, passed] = cli::cmd_validate(cfg);
      if (!out.empty()) tripent::write_text(cfg.out / "validate.json", report.dump(2) + "\n");
      std::cout << report.dump(2) << "\n";
      if (!passed) {
        std::string why = "validation failed";
        for (const Json& c : report["checks"])
          if (!c["passed"].get<bool>()) why += "; " + c["name"].get<std::string>() + ": " + c["message"].get<std::string>();
        return fail("ValidationFailed", why, kValidation);
      }
      return kOk;
    }
    if (command == "spectrum") summary = cli::cmd_spectrum(cfg);
    if (command == "entangling-power") summary = cli::cmd_entangling_power(cfg);
    if (command == "decay") summary = cli::cmd_decay(cfg);
    if (command == "protocol") summary = cli::cmd_protocol(cfg);
    if (command == "sweep") summary = cli::cmd_sweep(cfg);
    if (command == "figure") summary = cli::cmd_figure(cfg, figure);
    std::cout << summary.dump() << "\n";
    return kOk;
  } catch (const tripent::Error& e) {
    return fail(e.kind(), e.what(), kFailure);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), kFailure);
  }
}
