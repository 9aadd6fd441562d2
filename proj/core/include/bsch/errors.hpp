#ifndef BSCH_ERRORS_HPP
#define BSCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bsch {

// Base class for all library errors. Subclasses mark the failure category so
// callers can map them to exit codes or retry policies.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Evaluation of a singular nonlinearity outside (or too close to) the open
// interval (-1,1), or a tabulated potential outside its sample range.
struct DomainError : Error {
  using Error::Error;
};

// A scalar or vector iteration failed to reach its tolerance. For the Yosida
// resolvent this signals a bracket/tolerance bug, not a math failure.
struct ConvergenceError : Error {
  using Error::Error;
};

// Invalid run configuration (bad key, bad range, missing file).
struct ConfigError : Error {
  using Error::Error;
};

// A structural assumption on the nonlinearities failed; the message names the
// violated inequality and a witness point.
struct AssumptionViolation : Error {
  using Error::Error;
};

// Potential has no interior double-well structure.
struct NotDoubleWell : Error {
  using Error::Error;
};

// Right-hand side handed to the dual solve has nonzero generalized mean.
struct NonZeroMean : Error {
  using Error::Error;
};

// Iterative linear solve stopped making progress before the tolerance.
struct SolverStall : Error {
  using Error::Error;
};

// Newton iteration for a time step or steady state did not converge.
struct NewtonDivergence : Error {
  using Error::Error;
};

// A converged iterate reached the pure states +-1 within 1e-12.
struct SeparationBreach : Error {
  using Error::Error;
};

// Initial datum contains a pure state or cannot be mean-shifted into (-1,1).
struct InadmissibleInitialData : Error {
  using Error::Error;
};

// Adaptive stepping hit the minimum step size without recovering.
struct StepFloorReached : Error {
  using Error::Error;
};

// Steady-state Newton clamped its iterates too aggressively to trust.
struct NonAdmissibleIterate : Error {
  using Error::Error;
};

// Trajectory tail is not monotone enough to fit a decay rate.
struct NotDecaying : Error {
  using Error::Error;
};

// All sampled energy gaps are below the floor; no exponent can be fitted.
struct DegenerateSamples : Error {
  using Error::Error;
};

}  // namespace bsch

#endif
