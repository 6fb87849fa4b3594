#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecgpaper {

enum class Lead : int { I, II, III, aVR, aVL, aVF, V1, V2, V3, V4, V5, V6 };

inline constexpr std::size_t kLeadCount = 12;
inline constexpr std::array<std::string_view, kLeadCount> kLeadNames{
    "I", "II", "III", "aVR", "aVL", "aVF", "V1", "V2", "V3", "V4", "V5", "V6"};

std::string_view lead_name(Lead lead);
std::optional<Lead> lead_from_name(std::string_view name);

enum class Diagnosis : int { MI, AF, HYP, CD, STTC };

inline constexpr std::size_t kLabelCount = 5;
inline constexpr std::array<std::string_view, kLabelCount> kLabelNames{"MI", "AF", "HYP", "CD", "STTC"};

/// Five binary diagnoses in the fixed order MI, AF, HYP, CD, STTC.
struct DiagnosisVector {
    std::array<std::uint8_t, kLabelCount> flags{};

    bool operator[](Diagnosis d) const { return flags[static_cast<std::size_t>(d)] != 0; }
    bool operator[](std::size_t i) const { return flags[i] != 0; }
    void set(Diagnosis d, bool on = true) { flags[static_cast<std::size_t>(d)] = on ? 1 : 0; }

    /// Semicolon-joined names, e.g. "MI;STTC"; empty string for no diagnosis.
    std::string to_string() const;
    /// Inverse of to_string. Unknown names throw Error(BadHeader).
    static DiagnosisVector parse(std::string_view text);

    friend bool operator==(const DiagnosisVector&, const DiagnosisVector&) = default;
};

struct EcgRecord {
    std::string id;
    int fs = 0;
    std::array<std::vector<double>, kLeadCount> leads;
    DiagnosisVector labels;

    const std::vector<double>& lead(Lead l) const { return leads[static_cast<std::size_t>(l)]; }
    std::vector<double>& lead(Lead l) { return leads[static_cast<std::size_t>(l)]; }
    std::size_t length() const { return leads[0].size(); }
    double duration_s() const { return fs > 0 ? static_cast<double>(length()) / fs : 0.0; }

    friend bool operator==(const EcgRecord&, const EcgRecord&) = default;
};

/// Minimum record length in seconds (one panel window of a 10 s strip).
inline constexpr double kMinRecordSeconds = 2.5;

/// JSON sidecar: {"id": str, "fs": int, "units": "mV", "labels": "MI;STTC"}.
struct RecordSidecar {
    std::string id;
    int fs = 0;
    std::string units = "mV";
    DiagnosisVector labels;

    friend bool operator==(const RecordSidecar&, const RecordSidecar&) = default;
};

RecordSidecar parse_sidecar(std::string_view json_text);
std::string sidecar_to_json(const RecordSidecar& sidecar);

/// Parses the 12-column lead CSV. Sampling rate and labels come from the
/// sidecar when given, otherwise fs from fs_hint. Values are kept exactly as
/// parsed. Throws Error with MissingLead, NonFiniteSample, LengthMismatch,
/// BadHeader, MalformedCsv or TooShort.
EcgRecord parse_record(std::string_view csv, const std::optional<RecordSidecar>& sidecar,
                       std::optional<int> fs_hint = std::nullopt);

/// Reads <dir>/<stem>.csv plus the optional <dir>/<stem>.json sidecar.
EcgRecord load_record(const std::filesystem::path& csv_path, std::optional<int> fs_hint = std::nullopt);

/// Shortest round-trip decimal formatting, header in canonical lead order.
std::string record_to_csv(const EcgRecord& rec);
/// Writes <dir>/<id>.csv and <dir>/<id>.json.
void save_record(const EcgRecord& rec, const std::filesystem::path& dir);

enum class Rule { MissingLead, NonFiniteSample, LengthMismatch, TooShort, BadSamplingRate };

struct Violation {
    Rule rule;
    std::optional<Lead> lead;
    std::optional<std::size_t> index;

    std::string describe() const;
    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty iff every EcgRecord invariant holds.
std::vector<Violation> validate_record(const EcgRecord& rec);

/// Synthetic 12-lead record built from Gaussian P/QRS/T bumps with per-lead
/// projections and mild noise. Deterministic per seed; used for demos and tests.
EcgRecord synthesize_record(std::string id, std::uint64_t seed, int fs, double duration_s,
                            DiagnosisVector labels = {});

} // namespace ecgpaper
