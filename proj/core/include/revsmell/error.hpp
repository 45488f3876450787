#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revsmell {

/// Failure categories raised across the toolkit. The names double as the
/// `code` field of structured API errors.
enum class Errc {
    UnknownLabel,
    MalformedHunkHeader,
    LineCountMismatch,
    NotAnchored,
    SpanOutsideHunk,
    InsufficientPopulation,
    DuplicateExemplarLabel,
    MissingExemplarForLabel,
    UnknownExemplar,
    SchemaViolation,
    IngestionError,
    IncompleteExemplars,
    ExemplarLeak,
    ContractViolation,
    ConfigError,
    BackendError,
    EmptyMatrix,
    LengthMismatch,
    EmptyInput,
    SessionComplete,
    OutOfOrderSubmission,
    DuplicateRecord,
    IncompleteRound,
    NotInDisputeQueue,
    NotFound,
    Unauthorized,
    JoinMismatch,
    IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace revsmell
