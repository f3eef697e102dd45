#pragma once

#include <stdexcept>
#include <string>

namespace tripent {

// Every library failure carries a stable kind tag, used verbatim in CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TRIPENT_ERROR(Name)                                              \
  struct Name : Error {                                                  \
    explicit Name(const std::string& what) : Error(#Name, what) {}       \
  }

TRIPENT_ERROR(NotHermitian);
TRIPENT_ERROR(NotUnitary);
TRIPENT_ERROR(DimensionMismatch);
TRIPENT_ERROR(InvalidState);
TRIPENT_ERROR(InvalidParams);
TRIPENT_ERROR(PerturbationInvalid);
TRIPENT_ERROR(WrongRegime);
TRIPENT_ERROR(UnsupportedSupport);
TRIPENT_ERROR(StepSizeUnderflow);
TRIPENT_ERROR(DegenerateInput);
TRIPENT_ERROR(NoSeparation);
TRIPENT_ERROR(PerturbationCondViolated);
TRIPENT_ERROR(NoSolution);
TRIPENT_ERROR(Infeasible);
TRIPENT_ERROR(OptimizationFailed);
TRIPENT_ERROR(ConfigError);
TRIPENT_ERROR(UnknownFigure);
TRIPENT_ERROR(GridTooLarge);

#undef TRIPENT_ERROR

}  // namespace tripent
