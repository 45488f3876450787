#pragma once

#include "revsmell/corpus.hpp"
#include "revsmell/error.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace revsmell::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,
    kDataError = 2,
    kBackendError = 3,
};

int exit_code_for(Errc code) noexcept;

/// Creates `<out>/run-NNNN` with the first unused NNNN.
std::filesystem::path allocate_run_dir(const std::filesystem::path& out);

struct BuildArgs {
    std::filesystem::path upstream;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::optional<std::size_t> sample_size;
    std::optional<std::filesystem::path> diff_cache;
    double max_reject_rate = 0.5;
};

struct ClassifyArgs {
    std::filesystem::path corpus;
    std::string mode = "zero";
    std::string backend = "stub";
    std::string model = "stub";
    std::uint64_t seed = 0;
    unsigned parallelism = 1;
    std::filesystem::path out;
    std::optional<std::filesystem::path> exemplars;
    unsigned max_attempts = 3;
    long long timeout_ms = 60'000;
    std::optional<std::filesystem::path> template_path;
    std::optional<std::filesystem::path> stub_rules;
    bool exemplar_hunks = true;
};

struct EvaluateArgs {
    std::filesystem::path predictions;
    std::filesystem::path corpus;
    std::optional<std::filesystem::path> exemplars;
    std::filesystem::path out;
    std::string setting = "run";
};

struct ReplicateArgs {
    std::filesystem::path matrix;
    std::optional<std::filesystem::path> out;
};

struct AnnotateArgs {
    std::filesystem::path corpus;
    std::filesystem::path log;
    std::string annotator_a = "A1";
    std::string annotator_b = "A2";
    std::vector<std::string> arbiters{"A3"};
    std::size_t pilot_size = 10;
    std::uint64_t seed = 0;
};

struct ServeArgs : AnnotateArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
};

struct ApplyLabelsArgs : AnnotateArgs {
    std::filesystem::path out;
};

/// Each command writes its files under a fresh run directory (returned) and
/// prints a human-readable summary. Failures throw revsmell::Error.
std::filesystem::path cmd_build(const BuildArgs& args, std::ostream& out);
std::filesystem::path cmd_classify(const ClassifyArgs& args, std::ostream& out, bool* had_backend_errors = nullptr);
std::filesystem::path cmd_evaluate(const EvaluateArgs& args, std::ostream& out);
void cmd_replicate_table(const ReplicateArgs& args, std::ostream& out);
void cmd_serve(const ServeArgs& args, std::ostream& out);
std::filesystem::path cmd_apply_labels(const ApplyLabelsArgs& args, std::ostream& out);

/// Exemplar ids from a list file, else the manifest's is_exemplar flags.
std::vector<std::string> resolve_exemplar_ids(const corpus::CorpusManifest& manifest,
                                              const std::optional<std::filesystem::path>& list);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace revsmell::cli
