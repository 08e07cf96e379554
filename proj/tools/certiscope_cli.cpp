#include "certiscope/harness/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using certiscope::harness::RunOptions;

int main(int argc, char** argv) {
  CLI::App app{"Thin-grid LASSO and C-BP certificates, paths and experiments"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string profile = "fast";
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed for the Monte Carlo commands");
    sub->add_option("--profile", profile, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  };

  std::string command;
  auto plain = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    sub->callback([&command, name] { command = name; });
  };
  plain("certificates", "vanishing and third-derivative precertificates");
  plain("path", "LASSO and C-BP homotopy paths on a grid");
  plain("scaling", "lambda0 against the grid step");
  plain("gamma", "optimal values over nested grids");
  plain("gram-check", "inverse Gram expansions against their leading terms");

  CLI::App* cs = app.add_subcommand("cs", "compressed sensing experiments");
  cs->require_subcommand(1);
  for (const char* name : {"transition", "histogram"}) {
    CLI::App* sub = cs->add_subcommand(name, std::string("CS ") + name);
    add_common(sub);
    sub->callback([&command, name] { command = std::string("cs ") + name; });
  }

  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : app.get_subcommands()) {
    const CLI::App* leaf = sub->get_subcommands().empty() ? sub : sub->get_subcommands().front();
    if (leaf->count("--seed")) opts.seed = seed;
  }
  opts.profile = certiscope::harness::profile_from_string(profile);
  return certiscope::harness::run_command(command, opts);
}
