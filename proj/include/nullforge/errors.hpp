#pragma once

#include <stdexcept>
#include <string>

namespace nullforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define NULLFORGE_ERROR(Name)           \
  struct Name : Error {                 \
    using Error::Error;                 \
  };

NULLFORGE_ERROR(DomainError)
NULLFORGE_ERROR(ResidueError)
NULLFORGE_ERROR(ApproximationError)
NULLFORGE_ERROR(DimensionError)
NULLFORGE_ERROR(LiftError)
NULLFORGE_ERROR(FitError)
NULLFORGE_ERROR(NondegeneracyError)
NULLFORGE_ERROR(DegenerateFrameError)
NULLFORGE_ERROR(PeriodError)
NULLFORGE_ERROR(GeneralPositionError)
NULLFORGE_ERROR(NoLiftError)
NULLFORGE_ERROR(OscillationError)
NULLFORGE_ERROR(PreconditionError)
NULLFORGE_ERROR(GainShortfall)
NULLFORGE_ERROR(CurvatureError)
NULLFORGE_ERROR(GeometryError)
NULLFORGE_ERROR(ConfigError)

#undef NULLFORGE_ERROR

// Carries the best measurement reached before the iteration budget ran out.
struct BudgetExhausted : Error {
  BudgetExhausted(const std::string& what, double best) : Error(what), best_achieved(best) {}
  double best_achieved;
};

}  // namespace nullforge
