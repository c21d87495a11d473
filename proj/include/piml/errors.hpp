#ifndef PIML_ERRORS_HPP_
#define PIML_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace piml {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Zero-volume boxes, empty intervals.
class InvalidDomainError : public Error {
 public:
  using Error::Error;
};

// A model or problem cannot provide what was asked (derivative order,
// exact solution, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Non-finite integrand or residual value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the domain of a formula (negative norms, nu = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace piml

#endif  // PIML_ERRORS_HPP_
