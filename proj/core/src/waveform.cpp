#include "ecgpaper/waveform.hpp"

#include "ecgpaper/error.hpp"
#include "ecgpaper/image.hpp"
#include "ecgpaper/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ecgpaper {

std::string_view lead_name(Lead lead) {
    return kLeadNames[static_cast<std::size_t>(lead)];
}

std::optional<Lead> lead_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        if (kLeadNames[i] == name) return static_cast<Lead>(i);
    }
    return std::nullopt;
}

std::string DiagnosisVector::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < kLabelCount; ++i) {
        if (!flags[i]) continue;
        if (!out.empty()) out += ';';
        out += kLabelNames[i];
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

} // namespace

DiagnosisVector DiagnosisVector::parse(std::string_view text) {
    DiagnosisVector v;
    text = trim(text);
    if (text.empty()) return v;
    for (std::string_view part : split(text, ';')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto it = std::find(kLabelNames.begin(), kLabelNames.end(), part);
        if (it == kLabelNames.end()) {
            throw Error(Errc::BadHeader, "unknown diagnosis label '" + std::string(part) + "'");
        }
        v.flags[static_cast<std::size_t>(it - kLabelNames.begin())] = 1;
    }
    return v;
}

RecordSidecar parse_sidecar(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadHeader, std::string("sidecar is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(Errc::BadHeader, "sidecar must be a JSON object");
    RecordSidecar s;
    if (j.contains("id")) {
        if (!j["id"].is_string()) throw Error(Errc::BadHeader, "sidecar 'id' must be a string");
        s.id = j["id"].get<std::string>();
    }
    if (!j.contains("fs") || !j["fs"].is_number_integer()) {
        throw Error(Errc::BadHeader, "sidecar 'fs' must be an integer");
    }
    s.fs = j["fs"].get<int>();
    if (s.fs <= 0) throw Error(Errc::BadHeader, "sidecar 'fs' must be positive");
    if (j.contains("units")) {
        if (!j["units"].is_string()) throw Error(Errc::BadHeader, "sidecar 'units' must be a string");
        s.units = j["units"].get<std::string>();
    }
    if (s.units != "mV") throw Error(Errc::BadHeader, "amplitudes must be in mV, got '" + s.units + "'");
    if (j.contains("labels")) {
        if (!j["labels"].is_string()) throw Error(Errc::BadHeader, "sidecar 'labels' must be a string");
        s.labels = DiagnosisVector::parse(j["labels"].get<std::string>());
    }
    return s;
}

std::string sidecar_to_json(const RecordSidecar& s) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["fs"] = s.fs;
    j["units"] = s.units;
    j["labels"] = s.labels.to_string();
    return j.dump(2) + "\n";
}

EcgRecord parse_record(std::string_view csv, const std::optional<RecordSidecar>& sidecar,
                       std::optional<int> fs_hint) {
    EcgRecord rec;
    if (sidecar) {
        rec.id = sidecar->id;
        rec.fs = sidecar->fs;
        rec.labels = sidecar->labels;
        if (sidecar->units != "mV") throw Error(Errc::BadHeader, "amplitudes must be in mV");
    } else if (fs_hint) {
        rec.fs = *fs_hint;
    }
    if (rec.fs <= 0) throw Error(Errc::BadHeader, "sampling rate unknown or not positive");

    if (csv.size() >= 3 && static_cast<unsigned char>(csv[0]) == 0xEF &&
        static_cast<unsigned char>(csv[1]) == 0xBB && static_cast<unsigned char>(csv[2]) == 0xBF) {
        csv.remove_prefix(3);
    }

    const auto lines = split(csv, '\n');
    std::size_t line_no = 0;
    while (line_no < lines.size() && trim(lines[line_no]).empty()) ++line_no;
    if (line_no == lines.size()) throw Error(Errc::BadHeader, "empty CSV");

    std::vector<Lead> columns;
    std::array<bool, kLeadCount> seen{};
    for (std::string_view name : split(trim(lines[line_no]), ',')) {
        name = trim(name);
        const auto lead = lead_from_name(name);
        if (!lead) throw Error(Errc::BadHeader, "unknown column '" + std::string(name) + "'");
        auto& flag = seen[static_cast<std::size_t>(*lead)];
        if (flag) throw Error(Errc::BadHeader, "duplicate column '" + std::string(name) + "'");
        flag = true;
        columns.push_back(*lead);
    }
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        if (!seen[i]) throw Error(Errc::MissingLead, "lead " + std::string(kLeadNames[i]) + " absent from header");
    }

    for (++line_no; line_no < lines.size(); ++line_no) {
        const std::string_view line = trim(lines[line_no]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() > columns.size()) {
            throw Error(Errc::MalformedCsv, "line " + std::to_string(line_no + 1) + " has too many fields");
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            std::string_view f = trim(fields[c]);
            if (f.empty()) continue;
            if (f.front() == '+') f.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            auto& series = rec.lead(columns[c]);
            if (ec == std::errc::result_out_of_range) {
                throw Error(Errc::NonFiniteSample, "lead " + std::string(lead_name(columns[c])) + " sample " +
                                                       std::to_string(series.size()) + " out of range");
            }
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw Error(Errc::MalformedCsv, "line " + std::to_string(line_no + 1) + ": cannot parse '" +
                                                    std::string(f) + "'");
            }
            if (!std::isfinite(v)) {
                throw Error(Errc::NonFiniteSample, "lead " + std::string(lead_name(columns[c])) + " sample " +
                                                       std::to_string(series.size()));
            }
            series.push_back(v);
        }
    }

    for (const Violation& v : validate_record(rec)) {
        switch (v.rule) {
        case Rule::MissingLead: throw Error(Errc::MissingLead, v.describe());
        case Rule::NonFiniteSample: throw Error(Errc::NonFiniteSample, v.describe());
        case Rule::LengthMismatch: throw Error(Errc::LengthMismatch, v.describe());
        case Rule::TooShort: throw Error(Errc::TooShort, v.describe());
        case Rule::BadSamplingRate: throw Error(Errc::BadHeader, v.describe());
        }
    }
    return rec;
}

EcgRecord load_record(const std::filesystem::path& csv_path, std::optional<int> fs_hint) {
    std::optional<RecordSidecar> sidecar;
    auto sidecar_path = csv_path;
    sidecar_path.replace_extension(".json");
    if (std::filesystem::exists(sidecar_path)) sidecar = parse_sidecar(read_text(sidecar_path));
    EcgRecord rec = parse_record(read_text(csv_path), sidecar, fs_hint);
    if (rec.id.empty()) rec.id = csv_path.stem().string();
    return rec;
}

std::string record_to_csv(const EcgRecord& rec) {
    std::string out;
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        if (i) out += ',';
        out += kLeadNames[i];
    }
    out += '\n';
    char buf[64];
    for (std::size_t row = 0; row < rec.length(); ++row) {
        for (std::size_t i = 0; i < kLeadCount; ++i) {
            if (i) out += ',';
            const auto res = std::to_chars(buf, buf + sizeof(buf), rec.leads[i].at(row));
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

void save_record(const EcgRecord& rec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / (rec.id + ".csv"), record_to_csv(rec));
    write_text(dir / (rec.id + ".json"), sidecar_to_json({rec.id, rec.fs, "mV", rec.labels}));
}

std::string Violation::describe() const {
    std::ostringstream os;
    switch (rule) {
    case Rule::MissingLead: os << "MissingLead"; break;
    case Rule::NonFiniteSample: os << "NonFiniteSample"; break;
    case Rule::LengthMismatch: os << "LengthMismatch"; break;
    case Rule::TooShort: os << "TooShort"; break;
    case Rule::BadSamplingRate: os << "BadSamplingRate"; break;
    }
    if (lead || index) {
        os << '(';
        if (lead) os << lead_name(*lead);
        if (lead && index) os << ", ";
        if (index) os << *index;
        os << ')';
    }
    return os.str();
}

std::vector<Violation> validate_record(const EcgRecord& rec) {
    std::vector<Violation> out;
    if (rec.fs <= 0) out.push_back({Rule::BadSamplingRate, std::nullopt, std::nullopt});

    std::optional<std::size_t> reference;
    for (std::size_t i = 0; i < kLeadCount; ++i) {
        const Lead lead = static_cast<Lead>(i);
        const auto& series = rec.leads[i];
        if (series.empty()) {
            out.push_back({Rule::MissingLead, lead, std::nullopt});
            continue;
        }
        if (!reference) {
            reference = series.size();
        } else if (series.size() != *reference) {
            out.push_back({Rule::LengthMismatch, lead, series.size()});
        }
        for (std::size_t k = 0; k < series.size(); ++k) {
            if (!std::isfinite(series[k])) {
                out.push_back({Rule::NonFiniteSample, lead, k});
                break;
            }
        }
    }
    if (rec.fs > 0 && reference) {
        const std::size_t longest = std::max_element(rec.leads.begin(), rec.leads.end(), [](const auto& a, const auto& b) {
                                        return a.size() < b.size();
                                    })->size();
        if (static_cast<double>(longest) < rec.fs * kMinRecordSeconds) {
            out.push_back({Rule::TooShort, std::nullopt, longest});
        }
    }
    return out;
}

namespace {

struct Wave {
    double offset_s; // relative to R peak
    double width_s;
    double amplitude;
};

double gaussian(double t, double mu, double sigma) {
    const double z = (t - mu) / sigma;
    return std::exp(-0.5 * z * z);
}

} // namespace

EcgRecord synthesize_record(std::string id, std::uint64_t seed, int fs, double duration_s, DiagnosisVector labels) {
    if (fs <= 0 || !(duration_s > 0.0)) throw Error(Errc::InvalidArgument, "fs and duration must be positive");
    Rng rng(seed);
    EcgRecord rec;
    rec.id = std::move(id);
    rec.fs = fs;
    rec.labels = labels;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));

    const bool af = labels[Diagnosis::AF];
    const double rr_mean = 60.0 / rng.uniform(58.0, 88.0);
    std::vector<double> beats;
    for (double t = rng.uniform(0.1, 0.5); t < duration_s + 1.0;) {
        beats.push_back(t);
        const double jitter = af ? rng.uniform(-0.35, 0.35) : rng.uniform(-0.03, 0.03);
        t += rr_mean * (1.0 + jitter);
    }

    const double qrs_scale = labels[Diagnosis::CD] ? 2.2 : 1.0;
    const double r_gain = labels[Diagnosis::HYP] ? 2.0 : 1.0;
    const double t_sign = labels[Diagnosis::STTC] ? -0.8 : 1.0;
    const double st_shift = labels[Diagnosis::MI] ? 0.18 : 0.0;
    const double q_depth = labels[Diagnosis::MI] ? -0.35 : -0.08;

    // Independent leads: I, II, V1..V6. Per-lead gains on (P, Q, R, S, T).
    struct Gains {
        double p, q, r, s, t, st;
    };
    const std::array<Gains, 8> gains{{
        {0.10, 0.6, 0.7, 0.3, 0.25, 1.0},  // I
        {0.15, 0.5, 1.1, 0.3, 0.30, 1.0},  // II
        {0.08, 0.2, 0.3, 1.3, 0.10, 0.5},  // V1
        {0.08, 0.2, 0.6, 1.6, 0.35, 1.0},  // V2
        {0.08, 0.3, 1.0, 1.0, 0.40, 1.0},  // V3
        {0.08, 0.4, 1.5, 0.6, 0.40, 0.8},  // V4
        {0.08, 0.5, 1.4, 0.3, 0.35, 0.6},  // V5
        {0.08, 0.5, 1.1, 0.2, 0.30, 0.5},  // V6
    }};
    std::array<double, 8> lead_scale{};
    for (double& s : lead_scale) s = rng.uniform(0.85, 1.15);

    std::array<std::vector<double>, 8> base;
    for (std::size_t li = 0; li < base.size(); ++li) {
        const Gains& g = gains[li];
        const std::array<Wave, 6> waves{{
            {-0.20, 0.025, af ? 0.0 : g.p},
            {-0.035 * qrs_scale, 0.010 * qrs_scale, q_depth * g.q},
            {0.0, 0.012 * qrs_scale, r_gain * g.r},
            {0.035 * qrs_scale, 0.012 * qrs_scale, -0.4 * g.s},
            {0.28, 0.06, t_sign * g.t},
            {0.12, 0.05, st_shift * g.st},
        }};
        auto& out = base[li];
        out.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / fs;
            double v = 0.0;
            for (double b : beats) {
                if (std::abs(t - b) > 0.6) continue;
                for (const Wave& w : waves) v += w.amplitude * gaussian(t, b + w.offset_s, w.width_s);
            }
            if (af) v += 0.03 * std::sin(2.0 * std::numbers::pi * 6.0 * t + static_cast<double>(li));
            v = v * lead_scale[li] + 0.01 * rng.normal();
            out[k] = v;
        }
    }

    auto quantise = [](double v) { return std::round(v * 1000.0) / 1000.0; };
    const auto& lead_i = base[0];
    const auto& lead_ii = base[1];
    for (std::size_t k = 0; k < n; ++k) {
        rec.lead(Lead::I).push_back(quantise(lead_i[k]));
        rec.lead(Lead::II).push_back(quantise(lead_ii[k]));
        rec.lead(Lead::III).push_back(quantise(lead_ii[k] - lead_i[k]));
        rec.lead(Lead::aVR).push_back(quantise(-0.5 * (lead_i[k] + lead_ii[k])));
        rec.lead(Lead::aVL).push_back(quantise(lead_i[k] - 0.5 * lead_ii[k]));
        rec.lead(Lead::aVF).push_back(quantise(lead_ii[k] - 0.5 * lead_i[k]));
        for (std::size_t v = 0; v < 6; ++v) {
            rec.leads[static_cast<std::size_t>(Lead::V1) + v].push_back(quantise(base[2 + v][k]));
        }
    }
    return rec;
}

} // namespace ecgpaper
