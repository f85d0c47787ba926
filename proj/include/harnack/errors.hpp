#pragma once

#include <stdexcept>
#include <string>

namespace harnack {

class UnsupportedRegime : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + " after " +
                           std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace harnack
