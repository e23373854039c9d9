#include <Eigen/Core>
#include <fftw3.h>
#include <openssl/crypto.h>

#include <filesystem>
#include <ostream>

#include "emitter.hpp"
#include "pipeline.hpp"

namespace sthm::run {

const char* command_name(Command c) {
  switch (c) {
    case Command::sample: return "sample";
    case Command::forward: return "forward";
    case Command::correlate: return "correlate";
    case Command::reconstruct: return "reconstruct";
    case Command::study: return "study";
  }
  return "?";
}

Command command_from(const std::string& name) {
  for (Command c : {Command::sample, Command::forward, Command::correlate, Command::reconstruct, Command::study})
    if (name == command_name(c)) return c;
  throw ConfigError("command", "unknown command '" + name + "'");
}

void write_error_record(const std::string& out_dir, int exit_code, const nlohmann::json& detail) {
  nlohmann::json j = detail;
  j["status"] = "failed";
  j["exit_code"] = exit_code;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  try {
    io::write_file((std::filesystem::path(out_dir) / kErrorName).string(), j.dump(2) + "\n");
  } catch (const Error&) {
  }
}

namespace {

nlohmann::json libraries() {
  return {{"sthm", kVersion},
          {"fftw", std::string(fftw_version)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"openssl", std::string(OpenSSL_version(OPENSSL_VERSION))}};
}

int fail(const Invocation& inv, std::ostream& log, int code, nlohmann::json detail) {
  log << "error: " << detail.value("message", std::string("unknown failure")) << "\n";
  write_error_record(inv.config.output, code, detail);
  return code;
}

}  // namespace

int execute(const Invocation& inv, std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir(inv.config.output);
  try {
    io::validate(inv.config);
    if (inv.workers < 1) throw ConfigError("workers", "must be at least 1");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output", "cannot create directory " + dir.string());
    for (const char* stale : {kManifestName, kErrorName}) fs::remove(dir / stale, ec);
    fs::remove(dir / (std::string(kManifestName) + ".tmp"), ec);

    Emitter out(dir, command_name(inv.command));
    const auto t0 = std::chrono::steady_clock::now();
    if (inv.config.dimension == 2) run_stages<2>(inv, out, log);
    else run_stages<3>(inv, out, log);
    out.time("total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    out.finalize({{"tool", "sthm"},
                  {"version", kVersion},
                  {"command", command_name(inv.command)},
                  {"workers", inv.workers},
                  {"with_deps", inv.with_deps},
                  {"config", io::to_json(inv.config)},
                  {"libraries", libraries()},
                  {"tolerances", tolerances(inv.config)}});
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail(inv, log, kExitConfig,
                {{"kind", "config_error"}, {"field", e.field}, {"reason", e.reason}, {"message", e.what()}});
  } catch (const MissingDependency& e) {
    return fail(inv, log, kExitMissing,
                {{"kind", "missing_dependency"}, {"stage", e.stage}, {"file", e.file}, {"message", e.what()}});
  } catch (const StageFailure& e) {
    return fail(inv, log, kExitNumeric,
                {{"kind", "numeric_failure"}, {"stage", e.stage}, {"message", e.what()}});
  } catch (const PoisonedOutput& e) {
    return fail(inv, log, kExitNumeric, {{"kind", "poisoned_output"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(inv, log, kExitNumeric, {{"kind", "numeric_failure"}, {"message", e.what()}});
  }
}

}  // namespace sthm::run
