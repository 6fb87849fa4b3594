#pragma once

#include "ecgpaper/geometry.hpp"
#include "ecgpaper/recipe.hpp"
#include "ecgpaper/waveform.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ecgpaper {

struct ManifestEntry {
    std::string id;
    /// Relative to the manifest's directory.
    std::string image_path;
    DiagnosisVector labels;
    std::optional<Quad> corners;
    std::optional<DistortionRecipe> recipe;
    std::optional<int> fold;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    const ManifestEntry* find(std::string_view id) const;
    std::size_t size() const { return entries.size(); }

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);

/// Schema errors throw Error(SchemaViolation) with a JSON-pointer location.
/// When fold_count is given, folds must lie in [0, fold_count).
DatasetManifest manifest_from_json(const nlohmann::json& j, std::optional<int> fold_count = std::nullopt);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path, std::optional<int> fold_count = std::nullopt);

nlohmann::json quad_to_json(const Quad& q);
Quad quad_from_json(const nlohmann::json& j, const std::string& where = "");

} // namespace ecgpaper
