#pragma once

#include <stdexcept>
#include <string>

namespace qmc {

// Invalid numeric argument (non-positive volatility, beta outside [0,1], ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Size parameter out of its supported range (grid bits, register bits).
class SizeError : public std::out_of_range {
 public:
  explicit SizeError(const std::string& what) : std::out_of_range(what) {}
};

// Parallel inputs whose lengths disagree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed configuration or command line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmc
