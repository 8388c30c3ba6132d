#pragma once

#include <stdexcept>

namespace crtbench {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition.
struct ContractError : Error { using Error::Error; };
// Malformed CSV input.
struct ParseError : Error { using Error::Error; };
// Header / column-spec inconsistencies.
struct SchemaError : Error { using Error::Error; };
// Failure inside the preprocessing pipeline.
struct PreprocessError : Error { using Error::Error; };
// Stratified split cannot be formed.
struct SplitError : Error { using Error::Error; };
// A rate whose denominator is zero.
struct UndefinedRateError : Error { using Error::Error; };
// Training hit non-finite values.
struct TrainingError : Error { using Error::Error; };
// Bad experiment or generator configuration.
struct ConfigError : Error { using Error::Error; };
// Chart emission got unusable data.
struct EmissionError : Error { using Error::Error; };
// Artifacts produced under different configurations were mixed.
struct ConsistencyError : Error { using Error::Error; };

} // namespace crtbench
