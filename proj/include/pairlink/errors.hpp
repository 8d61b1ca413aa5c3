#pragma once

#include <stdexcept>
#include <string>

namespace pairlink {

// Precondition violated by the caller (non-positive length, probability
// outside [0,1], rank-deficient measurement set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The inputs are valid but the requested quantity does not exist: infinite
// CAR, QBER with no coincidences, key-rate optimum of an all-zero curve.
class UndefinedResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw DomainError(what);
}

}  // namespace pairlink
