#include "emitter.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "sthm/run/runner.hpp"

namespace sthm::run {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw Error("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Emitter::Emitter(std::filesystem::path dir, std::string stage) : dir_(std::move(dir)), stage_(std::move(stage)) {}

void Emitter::bytes(const std::string& name, const std::string& content) {
  io::write_file(path(name).string(), content);
  files_[name] = {content.size(), sha256_hex(content)};
}

std::string Emitter::input(const std::string& name) {
  if (!has(name)) throw MissingDependency(stage_, name);
  std::string content = io::read_file(path(name).string());
  if (!files_.count(name)) inputs_[name] = {content.size(), sha256_hex(content)};
  return content;
}

void Emitter::finalize(nlohmann::json head) const {
  auto list = [](const std::map<std::string, Entry>& m) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [name, e] : m) a.push_back({{"path", name}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    return a;
  };
  head["files"] = list(files_);
  head["inputs"] = list(inputs_);
  head["stage_seconds"] = times_;
  for (const auto& [k, v] : extra_.items()) head[k] = v;
  const auto tmp = path(std::string(kManifestName) + ".tmp");
  io::write_file(tmp.string(), head.dump(2) + "\n");
  std::filesystem::rename(tmp, path(kManifestName));
}

}  // namespace sthm::run
