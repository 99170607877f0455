#pragma once

#include <stdexcept>
#include <string>

namespace mixsel {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct NotNormalized : Error { using Error::Error; };
struct MissingWarmStart : Error { using Error::Error; };
struct InconsistentState : Error { using Error::Error; };
struct DegenerateReference : Error { using Error::Error; };
struct UnsupportedObjective : Error { using Error::Error; };
struct PoolExhausted : Error { using Error::Error; };
struct TooManyArms : Error { using Error::Error; };
struct InvalidConfidence : Error { using Error::Error; };
struct WarmStartTooSmall : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct BadMagic : Error { using Error::Error; };
struct NaNFound : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace mixsel
