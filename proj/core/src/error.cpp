#include "revsmell/error.hpp"

namespace revsmell {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::MalformedHunkHeader: return "MalformedHunkHeader";
    case Errc::LineCountMismatch: return "LineCountMismatch";
    case Errc::NotAnchored: return "NotAnchored";
    case Errc::SpanOutsideHunk: return "SpanOutsideHunk";
    case Errc::InsufficientPopulation: return "InsufficientPopulation";
    case Errc::DuplicateExemplarLabel: return "DuplicateExemplarLabel";
    case Errc::MissingExemplarForLabel: return "MissingExemplarForLabel";
    case Errc::UnknownExemplar: return "UnknownExemplar";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::IngestionError: return "IngestionError";
    case Errc::IncompleteExemplars: return "IncompleteExemplars";
    case Errc::ExemplarLeak: return "ExemplarLeak";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::ConfigError: return "ConfigError";
    case Errc::BackendError: return "BackendError";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::SessionComplete: return "SessionComplete";
    case Errc::OutOfOrderSubmission: return "OutOfOrderSubmission";
    case Errc::DuplicateRecord: return "DuplicateRecord";
    case Errc::IncompleteRound: return "IncompleteRound";
    case Errc::NotInDisputeQueue: return "NotInDisputeQueue";
    case Errc::NotFound: return "NotFound";
    case Errc::Unauthorized: return "Unauthorized";
    case Errc::JoinMismatch: return "JoinMismatch";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace revsmell
