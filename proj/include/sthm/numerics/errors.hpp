#pragma once

#include <stdexcept>
#include <string>

namespace sthm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct UnsupportedSize : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct ConsistencyError : Error { using Error::Error; };
struct LookupError : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };
struct DesignError : Error { using Error::Error; };
struct NormalizationError : Error { using Error::Error; };
struct PoisonedOutput : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

struct ConfigError : Error {
  ConfigError(std::string f, std::string r)
      : Error(f + ": " + r), field(std::move(f)), reason(std::move(r)) {}
  std::string field;
  std::string reason;
};

struct StageFailure : Error {
  StageFailure(std::string s, const std::string& what) : Error(s + ": " + what), stage(std::move(s)) {}
  std::string stage;
};

}  // namespace sthm
