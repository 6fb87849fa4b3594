#include "ecgpaper/manifest.hpp"

#include "ecgpaper/error.hpp"
#include "ecgpaper/image.hpp"

#include <unordered_set>

#include <nlohmann/json.hpp>

namespace ecgpaper {

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    throw Error(Errc::SchemaViolation, (where.empty() ? std::string("/") : where) + ": " + what);
}

} // namespace

const ManifestEntry* DatasetManifest::find(std::string_view id) const {
    for (const auto& e : entries) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

nlohmann::json quad_to_json(const Quad& q) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Point& p : q.pts) arr.push_back({p.x, p.y});
    return arr;
}

Quad quad_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) schema(where, "corners must be [[x,y] x 4]");
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& p = j[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            schema(where + "/" + std::to_string(i), "expected [x, y]");
        }
        q[i] = {p[0].get<double>(), p[1].get<double>()};
    }
    return q;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        nlohmann::json j;
        j["id"] = e.id;
        j["image_path"] = e.image_path;
        j["labels"] = e.labels.to_string();
        if (e.corners) j["corners"] = quad_to_json(*e.corners);
        if (e.recipe) j["recipe"] = recipe_to_json(*e.recipe);
        if (e.fold) j["fold"] = *e.fold;
        arr.push_back(std::move(j));
    }
    return arr;
}

DatasetManifest manifest_from_json(const nlohmann::json& j, std::optional<int> fold_count) {
    if (!j.is_array()) schema("", "manifest must be a JSON array of entries");
    DatasetManifest m;
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = "/" + std::to_string(i);
        const auto& e = j[i];
        if (!e.is_object()) schema(at, "entry must be an object");
        ManifestEntry entry;
        if (!e.contains("id") || !e["id"].is_string() || e["id"].get<std::string>().empty()) {
            schema(at + "/id", "expected a non-empty string");
        }
        entry.id = e["id"].get<std::string>();
        if (!ids.insert(entry.id).second) schema(at + "/id", "duplicate id '" + entry.id + "'");
        if (!e.contains("image_path") || !e["image_path"].is_string()) {
            schema(at + "/image_path", "expected a string");
        }
        entry.image_path = e["image_path"].get<std::string>();
        if (e.contains("labels")) {
            if (!e["labels"].is_string()) schema(at + "/labels", "expected a semicolon-joined string");
            try {
                entry.labels = DiagnosisVector::parse(e["labels"].get<std::string>());
            } catch (const Error& err) {
                schema(at + "/labels", err.detail());
            }
        }
        if (e.contains("corners")) entry.corners = quad_from_json(e["corners"], at + "/corners");
        if (e.contains("recipe")) entry.recipe = recipe_from_json(e["recipe"], at + "/recipe");
        if (e.contains("fold")) {
            if (!e["fold"].is_number_integer()) schema(at + "/fold", "expected an integer");
            const int fold = e["fold"].get<int>();
            if (fold < 0 || (fold_count && fold >= *fold_count)) {
                schema(at + "/fold", "fold " + std::to_string(fold) + " out of range");
            }
            entry.fold = fold;
        }
        m.entries.push_back(std::move(entry));
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_text(path, manifest_to_json(manifest).dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path, std::optional<int> fold_count) {
    const std::string text = read_text(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("/: not valid JSON: ") + e.what());
    }
    return manifest_from_json(j, fold_count);
}

} // namespace ecgpaper
