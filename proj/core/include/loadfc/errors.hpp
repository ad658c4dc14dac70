#pragma once

#include <stdexcept>
#include <string>

namespace loadfc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct DegenerateScale : Error { using Error::Error; };
struct DimensionTooLarge : Error { using Error::Error; };
struct AllZeroSpectrum : Error { using Error::Error; };
struct DegenerateCovariate : Error { using Error::Error; };
struct MissingData : Error { using Error::Error; };
struct MissingTrend : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct ModelUnavailable : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct ZeroDenominator : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct StoreError : Error { using Error::Error; };

} // namespace loadfc
