#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "sthm/io/config.hpp"

namespace sthm::run {

inline constexpr const char* kVersion = "0.4.0";
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kErrorName = "error.json";

enum class Command { sample, forward, correlate, reconstruct, study };

const char* command_name(Command c);
Command command_from(const std::string& name);

struct MissingDependency : Error {
  MissingDependency(std::string s, std::string f)
      : Error("stage '" + s + "' needs " + f), stage(std::move(s)), file(std::move(f)) {}
  std::string stage;
  std::string file;
};

struct Invocation {
  Command command = Command::study;
  io::RunConfig config;
  int workers = 1;
  bool with_deps = false;
};

// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 missing dependency.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitMissing = 4;

std::string sha256_hex(const std::string& bytes);

// Runs one command into config.output; the manifest is written last, an error record replaces it on failure.
int execute(const Invocation& inv, std::ostream& log);

// Writes the error record for a failure that happened before a run could start.
void write_error_record(const std::string& out_dir, int exit_code, const nlohmann::json& detail);

}  // namespace sthm::run
