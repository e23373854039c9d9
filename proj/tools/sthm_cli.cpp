#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sthm/run/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool with_deps = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration")->required();
  sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory (overrides the config)");
  sub->add_option_function<std::uint64_t>(
      "--seed", [&f](std::uint64_t s) { f.seed = s, f.seed_set = true; }, "master seed (overrides the config)");
  sub->add_flag("--with-deps", f.with_deps, "regenerate missing upstream stage outputs");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sthm;
  CLI::App app{"Stochastic Helmholtz source reconstruction"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"sample", "forward", "correlate", "reconstruct", "study"}) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
    add_flags(sub, flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return run::kExitConfig;
  }

  run::Invocation inv;
  inv.command = run::command_from(app.get_subcommands().front()->get_name());
  inv.workers = flags.workers;
  inv.with_deps = flags.with_deps;
  try {
    std::ifstream in(flags.config);
    if (!in) throw ConfigError("config", "cannot read " + flags.config);
    std::stringstream text;
    text << in.rdbuf();
    auto j = [&] {
      try {
        return nlohmann::json::parse(text.str());
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("is not valid JSON: ") + e.what());
      }
    }();
    if (!flags.out.empty()) j["output"] = flags.out;
    if (flags.seed_set) j["seed"] = flags.seed;
    inv.config = io::parse_config(j);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    run::write_error_record(flags.out.empty() ? "." : flags.out, run::kExitConfig,
                            {{"kind", "config_error"}, {"field", e.field}, {"reason", e.reason}, {"message", e.what()}});
    return run::kExitConfig;
  }
  return run::execute(inv, std::cerr);
}
