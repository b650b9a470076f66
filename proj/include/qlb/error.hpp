#pragma once

#include <stdexcept>
#include <string>

namespace qlb {

/// A numerical invariant was violated (non-unitary operator, norm drift,
/// non-finite densities). The CLI maps this to exit status 2.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

/// Bad or unreadable configuration. The CLI maps this to exit status 1.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace qlb
