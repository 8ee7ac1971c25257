#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meanfield {

// Bad user input: parameters, config files, exponent intervals.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A run produced non-finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t particle)
      : std::runtime_error(what), particle_(particle) {}

  std::size_t particle() const noexcept { return particle_; }

 private:
  std::size_t particle_;
};

}  // namespace meanfield
