#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pfio/config.hpp"
#include "pfio/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fourier integral operator experiments on product spaces"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int jobs = 1;
  for (const auto& name : pfio::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config; defaults are used when omitted")->check(CLI::ExistingFile);
    sub->add_option("--jobs", jobs, "independent experiments run in parallel")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  pfio::ConfigResult parsed = config_path.empty() ? pfio::parse_config_string("{}") : pfio::parse_config(config_path);
  if (!parsed.config) {
    std::cerr << "invalid config:\n";
    for (const auto& v : parsed.violations) std::cerr << "  " << v << "\n";
    return 2;
  }
  try {
    pfio::RunSummary s = pfio::run(*parsed.config, sub, {out_dir, jobs});
    for (const auto& o : s.outcomes)
      std::cout << (o.pass ? "PASS " : "FAIL ") << o.name << (o.note.empty() ? "" : "  (" + o.note + ")") << "\n";
    std::cout << "manifest: " << s.manifest_path << "\n";
    return s.exit_code;
  } catch (const pfio::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
