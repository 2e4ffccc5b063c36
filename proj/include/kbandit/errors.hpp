#pragma once

#include <stdexcept>
#include <string>

namespace kbandit {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidArgs : std::runtime_error {
  explicit InvalidArgs(const std::string& what) : std::runtime_error(what) {}
};

struct GridTooCoarse : std::runtime_error {
  explicit GridTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

struct FactorizationFailure : std::runtime_error {
  explicit FactorizationFailure(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureNotConverged : std::runtime_error {
  explicit QuadratureNotConverged(const std::string& what) : std::runtime_error(what) {}
};

// Carries the specific inequality that failed during instance construction.
struct ConstraintViolation : std::runtime_error {
  std::string constraint;
  ConstraintViolation(std::string which, const std::string& detail)
      : std::runtime_error(which + ": " + detail), constraint(std::move(which)) {}
};

struct HorizonTooSmall : std::runtime_error {
  explicit HorizonTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct RewardOutOfRange : std::runtime_error {
  explicit RewardOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

struct NormalizerNotFound : std::runtime_error {
  explicit NormalizerNotFound(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateFit : std::runtime_error {
  explicit DegenerateFit(const std::string& what) : std::runtime_error(what) {}
};

struct UncertifiedInstance : std::runtime_error {
  explicit UncertifiedInstance(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kbandit
