#ifndef CPH_ERROR_HPP
#define CPH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cph {

enum class ErrorCode {
    SyntaxError,
    ForbiddenVariable,
    DomainError,
    DisconnectedGraph,
    SelfLoop,
    DuplicateName,
    NonContiguousVertices,
    NonUnimodular,
    Singular,
    NoConvergence,
    DimensionMismatch,
    VoltageCycle,
    CurrentCutset,
    NotATree,
    NotNormal,
    InvalidOffsets,
    StructurallyIllPosed,
    SingularSubJacobian,
    SingularSelection,
    NewtonDiverged,
    StepFailure,
    NotLTI,
    IrregularPencil,
    DefectiveSpectrum,
    GenerationFailed,
    InvalidArgument,
};

const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, int col, const std::string& message);
    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

private:
    int line_;
    int col_;
};

}  // namespace cph

#endif
