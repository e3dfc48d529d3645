#pragma once

#include <stdexcept>
#include <string>

namespace cocycle {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define COCYCLE_ERROR(Name)                                          \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

COCYCLE_ERROR(KernelHit)
COCYCLE_ERROR(InfiniteMoment)
COCYCLE_ERROR(AtomBudgetExceeded)
COCYCLE_ERROR(DimensionMismatch)
COCYCLE_ERROR(EmptyComplement)
COCYCLE_ERROR(HypothesisViolated)
COCYCLE_ERROR(InsufficientSignal)
COCYCLE_ERROR(InsufficientData)
COCYCLE_ERROR(DegenerateEnergy)
COCYCLE_ERROR(NotSymmetric)
COCYCLE_ERROR(ConfigError)
COCYCLE_ERROR(NoConvergence)

#undef COCYCLE_ERROR

}  // namespace cocycle
