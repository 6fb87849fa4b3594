#pragma once

#include "ecgpaper/geometry.hpp"
#include "ecgpaper/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ecgpaper {

// Optional members are filled in by apply_recipe ("realised" values). When a
// realised value is present it is used verbatim instead of being sampled.

struct ShadowStep {
    int n_control = 6;
    double intensity = 0.4; // 0 makes the step a no-op
    double feather = 12.0;
    std::optional<std::vector<Point>> control_points;

    friend bool operator==(const ShadowStep&, const ShadowStep&) = default;
};

struct PerspectiveStep {
    double jitter = 0.08; // fraction of min(W, H)
    std::optional<Homography> homography;

    friend bool operator==(const PerspectiveStep&, const PerspectiveStep&) = default;
};

struct RotateStep {
    double max_deg = 5.0;
    std::optional<double> angle_deg;

    friend bool operator==(const RotateStep&, const RotateStep&) = default;
};

struct ElasticStep {
    double alpha = 6.0;
    double sigma = 8.0;
    std::optional<std::string> field_hash;

    friend bool operator==(const ElasticStep&, const ElasticStep&) = default;
};

/// Line-anchored brightness ramp; does not move the paper corners.
struct CreaseStep {
    double depth = 0.15;
    double falloff = 10.0;
    std::optional<Point> anchor;
    std::optional<double> angle_deg;

    friend bool operator==(const CreaseStep&, const CreaseStep&) = default;
};

struct PhotometricStep {
    double brightness = 0.0;
    double contrast = 1.0;

    friend bool operator==(const PhotometricStep&, const PhotometricStep&) = default;
};

using DistortionStep = std::variant<ShadowStep, PerspectiveStep, RotateStep, ElasticStep, CreaseStep, PhotometricStep>;

std::string_view step_kind(const DistortionStep& step);
bool is_geometric(const DistortionStep& step);

struct DistortionRecipe {
    std::uint64_t seed = 0;
    /// Border added around the page before the steps run, as a fraction of
    /// min(W, H). Gives perspective/rotation room to stay on the canvas.
    double margin = 0.0;
    Rgb background{24, 24, 24};
    std::optional<int> margin_px;
    std::vector<DistortionStep> steps;

    friend bool operator==(const DistortionRecipe&, const DistortionRecipe&) = default;
};

nlohmann::json recipe_to_json(const DistortionRecipe& recipe);
/// Throws Error(SchemaViolation) naming the offending JSON pointer.
DistortionRecipe recipe_from_json(const nlohmann::json& j, const std::string& where = "");

void validate_recipe(const DistortionRecipe& recipe);

} // namespace ecgpaper
