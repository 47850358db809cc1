#pragma once

#include <stdexcept>
#include <string>

namespace voltpath {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document or violated type invariant. The message names
/// the offending field.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// SOC lookup outside the OCV knot range. The curve is never extrapolated.
class SocRangeError : public Error {
  public:
    using Error::Error;
};

/// The requested power draw exceeds what the battery can physically supply
/// at the current state (negative discriminant or non-positive voltage).
class InfeasibleLoadError : public Error {
  public:
    using Error::Error;
};

/// The least-squares fit could not be computed or produced an unusable
/// coefficient set.
class FitError : public Error {
  public:
    using Error::Error;
};

/// A (soc, power) query outside the box the linear fit was built on.
class FitDomainError : public Error {
  public:
    using Error::Error;
};

/// Pulse segmentation found nothing above the power threshold.
class NoPulsesError : public Error {
  public:
    using Error::Error;
};

/// Trajectories cannot be compared (non-overlapping time ranges).
class ComparisonError : public Error {
  public:
    using Error::Error;
};

/// A solver declined the problem: dominance safety violated, or the
/// brute-force node guard was exceeded.
class SolveRefusedError : public Error {
  public:
    using Error::Error;
};

/// A solver's deadline expired before it finished.
class TimeoutError : public Error {
  public:
    using Error::Error;
};

}  // namespace voltpath
