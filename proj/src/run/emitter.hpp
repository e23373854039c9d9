#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

#include "sthm/io/container.hpp"
#include "sthm/io/csv.hpp"

namespace sthm::run {

// Writes run outputs into one directory and keeps their hashes for the manifest.
class Emitter {
 public:
  Emitter(std::filesystem::path dir, std::string stage);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  bool has(const std::string& name) const { return std::filesystem::exists(path(name)); }

  // Stage name used in missing-dependency reports.
  void set_stage(std::string stage) { stage_ = std::move(stage); }
  const std::string& stage() const { return stage_; }

  void bytes(const std::string& name, const std::string& content);

  template <typename T>
  void array(const std::string& name, const std::vector<T>& values, const std::vector<std::size_t>& shape) {
    bytes(name, io::encode_array(values, shape));
  }

  void table(const std::string& name, const io::CsvTable& t) { bytes(name, t.str()); }

  // Reads a prior-stage output and records its hash among the inputs.
  std::string input(const std::string& name);
  io::RawArray input_array(const std::string& name) { return io::decode_array(input(name)); }
  io::CsvTable input_table(const std::string& name) { return io::CsvTable::parse(input(name)); }

  void time(const std::string& what, double seconds) { times_[what] = seconds; }
  nlohmann::json& extra() { return extra_; }

  // Manifest goes to a temporary name first so a present manifest always describes a finished run.
  void finalize(nlohmann::json head) const;

 private:
  struct Entry {
    std::size_t bytes;
    std::string sha256;
  };

  std::filesystem::path dir_;
  std::string stage_;
  std::map<std::string, Entry> files_;
  std::map<std::string, Entry> inputs_;
  std::map<std::string, double> times_;
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace sthm::run
