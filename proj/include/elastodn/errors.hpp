#ifndef ELASTODN_ERRORS_HPP
#define ELASTODN_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace elastodn {

enum class ErrorKind {
    ConvexityViolation,
    SingularJacobian,
    InvalidDirection,
    RealRootDetected,
    DefectiveSolvent,
    ContourTooClose,
    NegativeDiscriminant,
    ZeroTangent,
    DegenerateProfile,
    InsufficientSamples,
    MissingSample,
    NegativeRadicand,
    SingularSystem,
    QuadratureFailure,
    RankDeficientDesign,
    CflViolation,
    InvalidArgument,
    Io,
    Parse,
    Usage,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ConvexityViolation: return "ConvexityViolation";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::InvalidDirection: return "InvalidDirection";
    case ErrorKind::RealRootDetected: return "RealRootDetected";
    case ErrorKind::DefectiveSolvent: return "DefectiveSolvent";
    case ErrorKind::ContourTooClose: return "ContourTooClose";
    case ErrorKind::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorKind::ZeroTangent: return "ZeroTangent";
    case ErrorKind::DegenerateProfile: return "DegenerateProfile";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::MissingSample: return "MissingSample";
    case ErrorKind::NegativeRadicand: return "NegativeRadicand";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Usage: return "UsageError";
    }
    return "Unknown";
}

/// Process exit status for each failure class:
/// 2 I/O, 3 validation, 4 numerical failure, 5 usage.
constexpr int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Parse:
        return 2;
    case ErrorKind::ConvexityViolation:
    case ErrorKind::InvalidDirection:
    case ErrorKind::SingularJacobian:
    case ErrorKind::ZeroTangent:
    case ErrorKind::MissingSample:
    case ErrorKind::InsufficientSamples:
    case ErrorKind::InvalidArgument:
        return 3;
    case ErrorKind::Usage:
        return 5;
    default:
        return 4;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

} // namespace elastodn

#endif // ELASTODN_ERRORS_HPP
