#pragma once

#include "ecgpaper/eval.hpp"
#include "ecgpaper/manifest.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ecgpaper {

/// Rows of a prediction CSV with header id,MI,AF,HYP,CD,STTC.
struct PredictionTable {
    std::vector<std::string> ids;
    std::vector<LabelScores> scores;

    friend bool operator==(const PredictionTable&, const PredictionTable&) = default;
};

/// Columns may come in any order; extra columns are ignored. Scores must be
/// finite and within [0, 1]. Throws Error(BadHeader) or Error(MalformedCsv).
PredictionTable parse_predictions(std::string_view csv);
PredictionTable read_predictions(const std::filesystem::path& path);

std::string predictions_to_csv(const PredictionTable& table);
void write_predictions(const PredictionTable& table, const std::filesystem::path& path);

struct Evaluation {
    AurocSummary auroc;
    std::size_t samples = 0;
    LabelCounts positives{};
};

/// Scores every manifest entry; predictions for ids not in the manifest are
/// ignored. Throws Error(MissingPrediction) or Error(SingleClass).
Evaluation evaluate(const PredictionTable& preds, const DatasetManifest& truth);

nlohmann::json evaluation_to_json(const Evaluation& e);

} // namespace ecgpaper
