#include "qspec/error.hpp"

namespace qspec {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidCutoff: return "invalid-cutoff";
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidGrid: return "invalid-grid";
    case ErrorKind::HermiticityViolation: return "hermiticity-violation";
    case ErrorKind::InvalidCount: return "invalid-count";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::SpecValidation: return "spec-validation";
    case ErrorKind::UnknownOperator: return "unknown-operator";
    case ErrorKind::MissingOscillatorLength: return "missing-l_osc";
    case ErrorKind::UnsupportedRepresentation: return "unsupported-representation";
    case ErrorKind::UnknownParameter: return "unknown-parameter";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonHermitianTotal: return "non-hermitian-total";
    case ErrorKind::SyntaxError: return "syntax-error";
    case ErrorKind::UnboundIdentifier: return "unbound-identifier";
    case ErrorKind::TypeError: return "type-error";
    case ErrorKind::DispersiveBreakdown: return "dispersive-breakdown";
    case ErrorKind::UnknownAxis: return "unknown-axis";
    case ErrorKind::NameCollision: return "name-collision";
    case ErrorKind::PointFailure: return "point-failure";
    case ErrorKind::UnknownLambdaField: return "unknown-lambda-field";
    case ErrorKind::NumericalDerivativeFailure: return "numerical-derivative-failure";
    case ErrorKind::SpectralDensityDomain: return "spectral-density-domain";
    case ErrorKind::UnsupportedChannel: return "unsupported-channel";
    case ErrorKind::BadOverride: return "bad-override";
    case ErrorKind::InvalidUnit: return "invalid-unit";
    }
    return "unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidCutoff:
    case ErrorKind::InvalidDimension:
    case ErrorKind::InvalidGrid:
    case ErrorKind::InvalidCount:
    case ErrorKind::SpecValidation:
    case ErrorKind::UnknownOperator:
    case ErrorKind::MissingOscillatorLength:
    case ErrorKind::UnsupportedRepresentation:
    case ErrorKind::UnknownParameter:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::SyntaxError:
    case ErrorKind::UnboundIdentifier:
    case ErrorKind::TypeError:
    case ErrorKind::UnknownAxis:
    case ErrorKind::NameCollision:
    case ErrorKind::UnknownLambdaField:
    case ErrorKind::UnsupportedChannel:
    case ErrorKind::BadOverride:
    case ErrorKind::InvalidUnit:
        return true;
    default:
        return false;
    }
}

}  // namespace qspec
