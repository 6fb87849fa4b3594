#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ecgpaper::cli {

namespace fs = std::filesystem;

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct EntryFailure {
    std::string id;
    std::string error;
};

struct BatchOutcome {
    std::size_t succeeded = 0;
    std::vector<EntryFailure> failures;

    int exit_code() const { return failures.empty() ? kExitOk : kExitPartial; }
};

struct SynthOptions {
    fs::path out;
    std::size_t count = 10;
    std::uint64_t seed = 0;
    int fs_hz = 500;
    double duration_s = 10.0;
    bool force = false;
};

/// Writes `count` synthetic waveform records (CSV + JSON sidecar) with
/// labels drawn at typical diagnostic prevalences.
BatchOutcome cmd_synth(const SynthOptions& opt);

struct GenerateOptions {
    fs::path waveforms;
    fs::path out;
    std::uint64_t seed = 0;
    std::optional<std::size_t> count;
    std::optional<fs::path> grid_config;
    /// Sampling rate for records without a JSON sidecar.
    std::optional<int> fs_hz;
    unsigned workers = 1;
    bool force = false;
};

/// Renders clean paper images and out/manifest.json. Unparseable records are
/// reported and skipped; no usable record at all is an error.
BatchOutcome cmd_generate(const GenerateOptions& opt);

struct DistortOptions {
    fs::path manifest;
    fs::path out;
    std::uint64_t seed = 0;
    std::optional<fs::path> recipe;
    /// Take each entry's realised recipe from this manifest instead.
    std::optional<fs::path> replay;
    unsigned workers = 1;
    bool force = false;
};

BatchOutcome cmd_distort(const DistortOptions& opt);

enum class RectifyMode { CropOnly, Full };

struct RectifyOptions {
    fs::path manifest;
    fs::path out;
    RectifyMode mode = RectifyMode::Full;
    std::optional<fs::path> config;
    unsigned workers = 1;
    bool force = false;
};

BatchOutcome cmd_rectify(const RectifyOptions& opt);

struct SplitOptions {
    fs::path manifest;
    fs::path out;
    int folds = 5;
    std::uint64_t seed = 0;
    bool force = false;
};

BatchOutcome cmd_split(const SplitOptions& opt);

struct EvaluateOptions {
    fs::path predictions;
    fs::path manifest;
    std::optional<fs::path> out;
};

/// Prints the metrics JSON to stdout and writes out/metrics.json when out is set.
BatchOutcome cmd_evaluate(const EvaluateOptions& opt);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv);

} // namespace ecgpaper::cli
