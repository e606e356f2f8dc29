#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qspec {

enum class ErrorKind {
    InvalidCutoff,
    InvalidDimension,
    InvalidGrid,
    HermiticityViolation,
    InvalidCount,
    SolverFailure,
    SpecValidation,
    UnknownOperator,
    MissingOscillatorLength,
    UnsupportedRepresentation,
    UnknownParameter,
    DimensionMismatch,
    NonHermitianTotal,
    SyntaxError,
    UnboundIdentifier,
    TypeError,
    DispersiveBreakdown,
    UnknownAxis,
    NameCollision,
    PointFailure,
    UnknownLambdaField,
    NumericalDerivativeFailure,
    SpectralDensityDomain,
    UnsupportedChannel,
    BadOverride,
    InvalidUnit,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type. `field` carries the
// offending spec field / axis / identifier when one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string field = {})
        : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorKind kind_;
    std::string field_;
};

// Input-side errors (exit code 2 / HTTP 400) versus compute errors.
bool is_input_error(ErrorKind kind) noexcept;

}  // namespace qspec
