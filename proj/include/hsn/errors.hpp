#pragma once

#include <stdexcept>
#include <string>

namespace hsn {

/// Base of all toolkit errors. The three direct subclasses map onto the
/// CLI exit classes: ConfigError -> 2, DataError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct SyntaxError : DataError {
    SyntaxError(int line_no, const std::string& reason)
        : DataError("line " + std::to_string(line_no) + ": " + reason), line(line_no) {}
    int line;
};

struct ReferenceError : DataError {
    using DataError::DataError;
};

struct ValueError : DataError {
    using DataError::DataError;
};

struct LabelMismatch : DataError {
    using DataError::DataError;
};

struct EmptyGraph : DataError {
    using DataError::DataError;
};

struct IsolatedNode : DataError {
    explicit IsolatedNode(long node_index)
        : DataError("node " + std::to_string(node_index) + " has degree zero"), node(node_index) {}
    long node;
};

struct DisconnectedComponent : DataError {
    using DataError::DataError;
};

struct InvalidSensorCount : ConfigError {
    using ConfigError::ConfigError;
};

struct IndexOutOfRange : ConfigError {
    using ConfigError::ConfigError;
};

struct DuplicateIndex : ConfigError {
    using ConfigError::ConfigError;
};

struct IntervalTooShort : ConfigError {
    using ConfigError::ConfigError;
};

struct WindowTooLong : ConfigError {
    using ConfigError::ConfigError;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonConvergence : NumericError {
    NonConvergence(const std::string& what_arg, long iterations_run, double final_residual)
        : NumericError(what_arg + " (iterations=" + std::to_string(iterations_run) +
                       ", residual=" + std::to_string(final_residual) + ")"),
          iterations(iterations_run),
          residual(final_residual) {}
    long iterations;
    double residual;
};

struct Divergence : NumericError {
    using NumericError::NumericError;
};

struct NonFiniteActivation : NumericError {
    using NumericError::NumericError;
};

}  // namespace hsn
