#pragma once

#include <stdexcept>
#include <string>

namespace hrpose {

// Base of all library errors. UsageError maps to CLI exit code 2,
// everything else to 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

struct InvalidBox : UsageError { using UsageError::UsageError; };
struct SingularXform : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NumericsError : Error { using Error::Error; };
struct ConfigError : UsageError { using UsageError::UsageError; };
struct CheckpointError : UsageError { using UsageError::UsageError; };
struct ParseError : UsageError { using UsageError::UsageError; };
struct SchemaError : UsageError { using UsageError::UsageError; };
struct RangeError : Error { using Error::Error; };
struct EvalError : UsageError { using UsageError::UsageError; };
struct EnsembleError : UsageError { using UsageError::UsageError; };
struct IoError : Error { using Error::Error; };

}  // namespace hrpose
