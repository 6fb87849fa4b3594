#include "ecgpaper/predictions.hpp"

#include "ecgpaper/error.hpp"
#include "ecgpaper/image.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace ecgpaper {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
    }
    return out;
}

std::optional<double> parse_score(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace

PredictionTable parse_predictions(std::string_view csv) {
    if (csv.starts_with("\xEF\xBB\xBF")) csv.remove_prefix(3);
    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start < csv.size();) {
        std::size_t nl = csv.find('\n', start);
        if (nl == std::string_view::npos) nl = csv.size();
        std::string_view line = csv.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = nl + 1;
    }
    if (lines.empty()) throw Error(Errc::BadHeader, "prediction file is empty");

    const auto header = split_commas(lines[0]);
    std::optional<std::size_t> id_col;
    std::array<std::optional<std::size_t>, kLabelCount> label_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "id") {
            if (id_col) throw Error(Errc::BadHeader, "duplicate column 'id'");
            id_col = c;
            continue;
        }
        for (std::size_t l = 0; l < kLabelCount; ++l) {
            if (header[c] == kLabelNames[l]) {
                if (label_col[l]) throw Error(Errc::BadHeader, "duplicate column '" + std::string(kLabelNames[l]) + "'");
                label_col[l] = c;
            }
        }
    }
    if (!id_col) throw Error(Errc::BadHeader, "missing column 'id'");
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        if (!label_col[l]) throw Error(Errc::BadHeader, "missing column '" + std::string(kLabelNames[l]) + "'");
    }

    PredictionTable t;
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = split_commas(lines[r]);
        const std::string where = "line " + std::to_string(r + 1);
        if (fields.size() != header.size()) throw Error(Errc::MalformedCsv, where + ": expected " + std::to_string(header.size()) + " fields");
        std::string id(fields[*id_col]);
        if (id.empty()) throw Error(Errc::MalformedCsv, where + ": empty id");
        if (!seen.emplace(id, r).second) throw Error(Errc::MalformedCsv, where + ": duplicate id '" + id + "'");
        LabelScores s{};
        for (std::size_t l = 0; l < kLabelCount; ++l) {
            const auto v = parse_score(fields[*label_col[l]]);
            if (!v || !std::isfinite(*v) || *v < 0.0 || *v > 1.0) {
                throw Error(Errc::MalformedCsv, where + ": " + std::string(kLabelNames[l]) + " score must be a number in [0, 1]");
            }
            s[l] = *v;
        }
        t.ids.push_back(std::move(id));
        t.scores.push_back(s);
    }
    return t;
}

PredictionTable read_predictions(const std::filesystem::path& path) {
    return parse_predictions(read_text(path));
}

std::string predictions_to_csv(const PredictionTable& table) {
    std::string out = "id";
    for (auto name : kLabelNames) {
        out += ',';
        out += name;
    }
    out += '\n';
    char buf[64];
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out += table.ids[i];
        for (double v : table.scores[i]) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out += ',';
            out.append(buf, res.ptr);
        }
        out += '\n';
    }
    return out;
}

void write_predictions(const PredictionTable& table, const std::filesystem::path& path) {
    write_text(path, predictions_to_csv(table));
}

Evaluation evaluate(const PredictionTable& preds, const DatasetManifest& truth) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < preds.ids.size(); ++i) index.emplace(preds.ids[i], i);
    ScoredPredictions sp;
    for (const auto& e : truth.entries) {
        const auto it = index.find(e.id);
        if (it == index.end()) throw Error(Errc::MissingPrediction, e.id);
        sp.scores.push_back(preds.scores[it->second]);
        sp.truths.push_back(e.labels);
    }
    Evaluation out;
    out.samples = sp.truths.size();
    out.positives = count_positives(sp.truths);
    out.auroc = macro_auroc(sp);
    return out;
}

nlohmann::json evaluation_to_json(const Evaluation& e) {
    nlohmann::json per_label;
    nlohmann::json positives;
    for (std::size_t l = 0; l < kLabelCount; ++l) {
        const std::string name(kLabelNames[l]);
        per_label[name] = e.auroc.per_label[l];
        positives[name] = e.positives[l];
    }
    return {{"macro_auroc", e.auroc.macro}, {"auroc", per_label}, {"samples", e.samples}, {"positives", positives}};
}

} // namespace ecgpaper
