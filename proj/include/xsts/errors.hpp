#ifndef XSTS_ERRORS_HPP_
#define XSTS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace xsts {

// Wrong regime for the requested operation (e.g. stationary path passed to a
// local-to-unity routine).
class regime_error : public std::invalid_argument {
 public:
  explicit regime_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Argument outside the admissible domain.
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};

// Singular or numerically rank-deficient linear system.
class singularity_error : public std::runtime_error {
 public:
  singularity_error(const std::string& msg, double condition_number = 0.0)
      : std::runtime_error(msg), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

// Mismatched dimensions between data and parameters.
class dimension_error : public std::invalid_argument {
 public:
  explicit dimension_error(const std::string& msg)
      : std::invalid_argument(msg) {}
};

// Misaligned panel / factor windows or bad configuration.
class config_error : public std::invalid_argument {
 public:
  explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace xsts

#endif  // XSTS_ERRORS_HPP_
