#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace capsim {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UnknownCapability : public Error {
  public:
    explicit UnknownCapability(std::string tag)
        : Error("unknown central capability: '" + tag + "'"), tag_{std::move(tag)} {}

    const std::string &tag() const noexcept { return tag_; }

  private:
    std::string tag_;
};

/// Malformed scenario document. `location()` is either "line L, column C" or a
/// key path such as "actions[1].effects[0]".
class ParseError : public Error {
  public:
    ParseError(std::string location, const std::string &what)
        : Error(location + ": " + what), location_{std::move(location)} {}

    const std::string &location() const noexcept { return location_; }

  private:
    std::string location_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_{std::move(violations)} {}

    const std::vector<std::string> &violations() const noexcept { return violations_; }

  private:
    static std::string join(const std::vector<std::string> &items) {
        std::string out = "validation failed";
        for (const auto &item : items) {
            out += "\n  - " + item;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

class StateSpaceExplosion : public Error {
  public:
    explicit StateSpaceExplosion(std::size_t cap)
        : Error("reachable state space exceeds cap of " + std::to_string(cap) + " states"),
          cap_{cap} {}

    std::size_t cap() const noexcept { return cap_; }

  private:
    std::size_t cap_;
};

class NonConvergence : public Error {
  public:
    NonConvergence(std::size_t max_iter, double residual)
        : Error("value iteration did not converge in " + std::to_string(max_iter) +
                " sweeps (residual " + std::to_string(residual) + ")"),
          max_iter_{max_iter}, residual_{residual} {}

    std::size_t max_iter() const noexcept { return max_iter_; }
    double residual() const noexcept { return residual_; }

  private:
    std::size_t max_iter_;
    double residual_;
};

class OracleTooLarge : public Error {
  public:
    using Error::Error;
};

class NoFeasibleAction : public Error {
  public:
    NoFeasibleAction() : Error("no feasible action to choose from") {}
};

class MetricMismatch : public Error {
  public:
    using Error::Error;
};

} // namespace capsim
