#include "ecgpaper/recipe.hpp"

#include "ecgpaper/error.hpp"

#include <nlohmann/json.hpp>

namespace ecgpaper {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    throw Error(Errc::SchemaViolation, (where.empty() ? std::string("/") : where) + ": " + what);
}

double get_number(const nlohmann::json& j, const char* key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) schema(where + "/" + key, "expected a number");
    return j[key].get<double>();
}

nlohmann::json point_json(Point p) {
    return nlohmann::json::array({p.x, p.y});
}

Point parse_point(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        schema(where, "expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json homography_json(const Homography& h) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({h(r, 0), h(r, 1), h(r, 2)});
    return rows;
}

Homography parse_homography(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) schema(where, "expected a 3x3 array");
    std::array<double, 9> e{};
    for (std::size_t r = 0; r < 3; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != 3) schema(where + "/" + std::to_string(r), "expected 3 numbers");
        for (std::size_t c = 0; c < 3; ++c) {
            if (!row[c].is_number()) schema(where + "/" + std::to_string(r) + "/" + std::to_string(c), "expected a number");
            e[r * 3 + c] = row[c].get<double>();
        }
    }
    return Homography(e);
}

} // namespace

std::string_view step_kind(const DistortionStep& step) {
    return std::visit(Overloaded{
                          [](const ShadowStep&) { return std::string_view("shadow"); },
                          [](const PerspectiveStep&) { return std::string_view("perspective"); },
                          [](const RotateStep&) { return std::string_view("rotate"); },
                          [](const ElasticStep&) { return std::string_view("elastic"); },
                          [](const CreaseStep&) { return std::string_view("crease"); },
                          [](const PhotometricStep&) { return std::string_view("photometric"); },
                      },
                      step);
}

bool is_geometric(const DistortionStep& step) {
    return std::holds_alternative<PerspectiveStep>(step) || std::holds_alternative<RotateStep>(step);
}

nlohmann::json recipe_to_json(const DistortionRecipe& recipe) {
    nlohmann::json j;
    j["seed"] = recipe.seed;
    if (recipe.margin != 0.0) j["margin"] = recipe.margin;
    if (recipe.margin_px) j["margin_px"] = *recipe.margin_px;
    j["background"] = {recipe.background.r, recipe.background.g, recipe.background.b};
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : recipe.steps) {
        nlohmann::json s;
        s["kind"] = step_kind(step);
        std::visit(Overloaded{
                       [&](const ShadowStep& v) {
                           s["n_control"] = v.n_control;
                           s["intensity"] = v.intensity;
                           s["feather"] = v.feather;
                           if (v.control_points) {
                               nlohmann::json pts = nlohmann::json::array();
                               for (Point p : *v.control_points) pts.push_back(point_json(p));
                               s["control_points"] = pts;
                           }
                       },
                       [&](const PerspectiveStep& v) {
                           s["jitter"] = v.jitter;
                           if (v.homography) s["homography"] = homography_json(*v.homography);
                       },
                       [&](const RotateStep& v) {
                           s["max_deg"] = v.max_deg;
                           if (v.angle_deg) s["angle_deg"] = *v.angle_deg;
                       },
                       [&](const ElasticStep& v) {
                           s["alpha"] = v.alpha;
                           s["sigma"] = v.sigma;
                           if (v.field_hash) s["field_hash"] = *v.field_hash;
                       },
                       [&](const CreaseStep& v) {
                           s["depth"] = v.depth;
                           s["falloff"] = v.falloff;
                           if (v.anchor) s["anchor"] = point_json(*v.anchor);
                           if (v.angle_deg) s["angle_deg"] = *v.angle_deg;
                       },
                       [&](const PhotometricStep& v) {
                           s["brightness"] = v.brightness;
                           s["contrast"] = v.contrast;
                       },
                   },
                   step);
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

DistortionRecipe recipe_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) schema(where, "recipe must be an object");
    DistortionRecipe r;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0)) {
            schema(where + "/seed", "expected an unsigned 64-bit integer");
        }
        r.seed = j["seed"].get<std::uint64_t>();
    }
    r.margin = get_number(j, "margin", 0.0, where);
    if (j.contains("margin_px")) {
        if (!j["margin_px"].is_number_integer()) schema(where + "/margin_px", "expected an integer");
        r.margin_px = j["margin_px"].get<int>();
    }
    if (j.contains("background")) {
        const auto& bg = j["background"];
        if (!bg.is_array() || bg.size() != 3) schema(where + "/background", "expected [r, g, b]");
        std::array<std::uint8_t, 3> c{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (!bg[i].is_number_integer() || bg[i].get<int>() < 0 || bg[i].get<int>() > 255) {
                schema(where + "/background/" + std::to_string(i), "expected an integer in [0, 255]");
            }
            c[i] = static_cast<std::uint8_t>(bg[i].get<int>());
        }
        r.background = {c[0], c[1], c[2]};
    }
    if (j.contains("steps")) {
        const auto& steps = j["steps"];
        if (!steps.is_array()) schema(where + "/steps", "expected an array");
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const std::string at = where + "/steps/" + std::to_string(i);
            const auto& s = steps[i];
            if (!s.is_object() || !s.contains("kind") || !s["kind"].is_string()) schema(at, "step needs a string 'kind'");
            const std::string kind = s["kind"].get<std::string>();
            if (kind == "shadow") {
                ShadowStep v;
                if (s.contains("n_control")) {
                    if (!s["n_control"].is_number_integer()) schema(at + "/n_control", "expected an integer");
                    v.n_control = s["n_control"].get<int>();
                }
                v.intensity = get_number(s, "intensity", v.intensity, at);
                v.feather = get_number(s, "feather", v.feather, at);
                if (s.contains("control_points")) {
                    const auto& pts = s["control_points"];
                    if (!pts.is_array()) schema(at + "/control_points", "expected an array");
                    std::vector<Point> cp;
                    for (std::size_t k = 0; k < pts.size(); ++k) {
                        cp.push_back(parse_point(pts[k], at + "/control_points/" + std::to_string(k)));
                    }
                    v.control_points = std::move(cp);
                }
                r.steps.emplace_back(std::move(v));
            } else if (kind == "perspective") {
                PerspectiveStep v;
                v.jitter = get_number(s, "jitter", v.jitter, at);
                if (s.contains("homography")) v.homography = parse_homography(s["homography"], at + "/homography");
                r.steps.emplace_back(v);
            } else if (kind == "rotate") {
                RotateStep v;
                v.max_deg = get_number(s, "max_deg", v.max_deg, at);
                if (s.contains("angle_deg")) v.angle_deg = get_number(s, "angle_deg", 0.0, at);
                r.steps.emplace_back(v);
            } else if (kind == "elastic") {
                ElasticStep v;
                v.alpha = get_number(s, "alpha", v.alpha, at);
                v.sigma = get_number(s, "sigma", v.sigma, at);
                if (s.contains("field_hash")) {
                    if (!s["field_hash"].is_string()) schema(at + "/field_hash", "expected a string");
                    v.field_hash = s["field_hash"].get<std::string>();
                }
                r.steps.emplace_back(std::move(v));
            } else if (kind == "crease") {
                CreaseStep v;
                v.depth = get_number(s, "depth", v.depth, at);
                v.falloff = get_number(s, "falloff", v.falloff, at);
                if (s.contains("anchor")) v.anchor = parse_point(s["anchor"], at + "/anchor");
                if (s.contains("angle_deg")) v.angle_deg = get_number(s, "angle_deg", 0.0, at);
                r.steps.emplace_back(v);
            } else if (kind == "photometric") {
                PhotometricStep v;
                v.brightness = get_number(s, "brightness", v.brightness, at);
                v.contrast = get_number(s, "contrast", v.contrast, at);
                r.steps.emplace_back(v);
            } else {
                schema(at + "/kind", "unknown step kind '" + kind + "'");
            }
        }
    }
    try {
        validate_recipe(r);
    } catch (const Error& e) {
        schema(where, e.what());
    }
    return r;
}

void validate_recipe(const DistortionRecipe& recipe) {
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
    if (!(recipe.margin >= 0.0 && recipe.margin <= 1.0)) bad("margin must lie in [0, 1]");
    if (recipe.margin_px && *recipe.margin_px < 0) bad("margin_px must be non-negative");
    for (const auto& step : recipe.steps) {
        std::visit(Overloaded{
                       [&](const ShadowStep& v) {
                           if (v.n_control < 4) bad("shadow n_control must be >= 4");
                           if (!(v.intensity >= 0.0 && v.intensity <= 1.0)) bad("shadow intensity must lie in [0, 1]");
                           if (!(v.feather >= 0.0)) bad("shadow feather must be >= 0");
                           if (v.control_points && v.control_points->size() != static_cast<std::size_t>(v.n_control)) {
                               bad("shadow control_points must have n_control entries");
                           }
                       },
                       [&](const PerspectiveStep& v) {
                           if (!(v.jitter >= 0.0 && v.jitter <= 0.25)) bad("perspective jitter must lie in [0, 0.25]");
                       },
                       [&](const RotateStep& v) {
                           if (!(v.max_deg >= 0.0 && v.max_deg <= 45.0)) bad("rotate max_deg must lie in [0, 45]");
                       },
                       [&](const ElasticStep& v) {
                           if (!(v.alpha >= 0.0)) bad("elastic alpha must be >= 0");
                           if (!(v.sigma > 0.0)) bad("elastic sigma must be > 0");
                       },
                       [&](const CreaseStep& v) {
                           if (!(v.depth >= 0.0 && v.depth <= 1.0)) bad("crease depth must lie in [0, 1]");
                           if (!(v.falloff > 0.0)) bad("crease falloff must be > 0");
                       },
                       [&](const PhotometricStep& v) {
                           if (!(v.brightness >= -0.5 && v.brightness <= 0.5)) bad("brightness must lie in [-0.5, 0.5]");
                           if (!(v.contrast >= 0.5 && v.contrast <= 2.0)) bad("contrast must lie in [0.5, 2]");
                       },
                   },
                   step);
    }
}

} // namespace ecgpaper
