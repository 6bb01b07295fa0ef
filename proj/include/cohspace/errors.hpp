#pragma once

#include <stdexcept>
#include <string>

namespace cohspace {

// Base of every domain error thrown by the library. `kind()` is a stable
// machine-readable tag; the CLI echoes it in its JSON error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define COHSPACE_ERROR(Name, tag)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(tag, what) {}    \
  }

COHSPACE_ERROR(InvalidPointError, "invalid-point");
COHSPACE_ERROR(CoherenceViolationError, "coherence-violation");
COHSPACE_ERROR(KernelNotPsdError, "kernel-not-psd");
COHSPACE_ERROR(NumericalError, "numerical");
COHSPACE_ERROR(PreconditionError, "precondition");
COHSPACE_ERROR(OutOfSpanError, "out-of-span");
COHSPACE_ERROR(SpanEscapeError, "span-escape");
COHSPACE_ERROR(StepSizeError, "step-size");
COHSPACE_ERROR(StiffnessError, "stiffness");
COHSPACE_ERROR(TruncationError, "truncation");
COHSPACE_ERROR(DegenerateMetricError, "degenerate-metric");
COHSPACE_ERROR(IntegratorFailureError, "integrator-failure");
COHSPACE_ERROR(ModelDegeneracyError, "model-degeneracy");
COHSPACE_ERROR(NonClosingAlgebraError, "non-closing-algebra");
COHSPACE_ERROR(StatePositivityError, "state-positivity");
COHSPACE_ERROR(NormalizationError, "normalization");
COHSPACE_ERROR(DomainError, "domain");
COHSPACE_ERROR(UnsupportedError, "unsupported");

#undef COHSPACE_ERROR

}  // namespace cohspace
