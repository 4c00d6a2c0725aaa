#include "cph/error.hpp"

namespace cph {

const char* error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::ForbiddenVariable: return "ForbiddenVariable";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::SelfLoop: return "SelfLoop";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::NonContiguousVertices: return "NonContiguousVertices";
        case ErrorCode::NonUnimodular: return "NonUnimodular";
        case ErrorCode::Singular: return "Singular";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::VoltageCycle: return "VoltageCycle";
        case ErrorCode::CurrentCutset: return "CurrentCutset";
        case ErrorCode::NotATree: return "NotATree";
        case ErrorCode::NotNormal: return "NotNormal";
        case ErrorCode::InvalidOffsets: return "InvalidOffsets";
        case ErrorCode::StructurallyIllPosed: return "StructurallyIllPosed";
        case ErrorCode::SingularSubJacobian: return "SingularSubJacobian";
        case ErrorCode::SingularSelection: return "SingularSelection";
        case ErrorCode::NewtonDiverged: return "NewtonDiverged";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::NotLTI: return "NotLTI";
        case ErrorCode::IrregularPencil: return "IrregularPencil";
        case ErrorCode::DefectiveSpectrum: return "DefectiveSpectrum";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

SyntaxError::SyntaxError(int line, int col, const std::string& message)
    : Error(ErrorCode::SyntaxError,
            "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + message),
      line_(line),
      col_(col) {}

}  // namespace cph
