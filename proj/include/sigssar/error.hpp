#pragma once

#include <stdexcept>
#include <string>

namespace sigssar {

/// Malformed or inconsistent input data (CSV contents, mismatched sizes).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage or unknown tags. Maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// I - rho W is singular or has a negative determinant at the requested rho.
class InadmissibleRho : public std::runtime_error {
 public:
  InadmissibleRho(double rho, const std::string& what)
      : std::runtime_error(what), rho_(rho) {}
  double rho() const noexcept { return rho_; }

 private:
  double rho_;
};

/// A linear system that the estimator needs is numerically singular.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigssar
