#ifndef TUBEDISSIP_ERRORS_HPP_
#define TUBEDISSIP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tubedissip {

/// The QP solver hit its iteration cap. Never used to signal infeasibility.
class SolverFailure : public std::runtime_error
{
public:
  explicit SolverFailure(const std::string & what) : std::runtime_error(what) {}
};

/// A problem that has to be feasible is not (e.g. no RCI set, z outside the controller domain).
class InfeasibleProblem : public std::runtime_error
{
public:
  explicit InfeasibleProblem(const std::string & what) : std::runtime_error(what) {}
};

/// Malformed configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string key, const std::string & what) : std::runtime_error(what), key_(std::move(key)) {}
  const std::string & key() const { return key_; }

private:
  std::string key_;
};

}  // namespace tubedissip

#endif  // TUBEDISSIP_ERRORS_HPP_
