#include "ecgpaper/render.hpp"

#include "ecgpaper/error.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace ecgpaper {

namespace {

constexpr double kCalibrationSeconds = 0.2;
constexpr double kCalibrationMillivolts = 1.0;

int to_px(double mm, double px_per_mm) {
    return static_cast<int>(std::lround(mm * px_per_mm));
}

nlohmann::json rgb_json(Rgb c) {
    return {c.r, c.g, c.b};
}

Rgb rgb_from(const nlohmann::json& j, const char* key, Rgb fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    if (!v.is_array() || v.size() != 3) throw Error(Errc::SchemaViolation, std::string("/") + key + ": expected [r, g, b]");
    return {v[0].get<std::uint8_t>(), v[1].get<std::uint8_t>(), v[2].get<std::uint8_t>()};
}

// Distance from p to segment ab.
double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
    const double cx = ax + t * dx - px;
    const double cy = ay + t * dy - py;
    return std::sqrt(cx * cx + cy * cy);
}

/// Per-pixel stroke coverage; max-combined so overlapping segments do not
/// darken joints twice.
class CoverageBuffer {
public:
    CoverageBuffer(int w, int h) : w_(w), h_(h), cov_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f) {}

    void segment(double ax, double ay, double bx, double by, const PixelRect& clip) {
        const int x0 = std::max(clip.x, static_cast<int>(std::floor(std::min(ax, bx))) - 1);
        const int x1 = std::min(clip.x + clip.width - 1, static_cast<int>(std::ceil(std::max(ax, bx))) + 1);
        const int y0 = std::max(clip.y, static_cast<int>(std::floor(std::min(ay, by))) - 1);
        const int y1 = std::min(clip.y + clip.height - 1, static_cast<int>(std::ceil(std::max(ay, by))) + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double d = segment_distance(x, y, ax, ay, bx, by);
                if (d >= 1.0) continue;
                float& c = cov_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)];
                c = std::max(c, static_cast<float>(1.0 - d));
            }
        }
    }

    void composite(Image& img, Rgb ink) const {
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                const float c = cov_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)];
                if (c <= 0.0f) continue;
                const Rgb bg = img.at(x, y);
                auto mix = [c](std::uint8_t b, std::uint8_t i) { return clamp_u8(b * (1.0 - c) + i * static_cast<double>(c)); };
                img.set(x, y, {mix(bg.r, ink.r), mix(bg.g, ink.g), mix(bg.b, ink.b)});
            }
        }
    }

private:
    int w_;
    int h_;
    std::vector<float> cov_;
};

} // namespace

void GridConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
    if (!(px_per_mm >= 4.0) || !std::isfinite(px_per_mm)) bad("px_per_mm must be >= 4");
    if (!(mm_per_s > 0.0)) bad("mm_per_s must be positive");
    if (!(mm_per_mv > 0.0)) bad("mm_per_mv must be positive");
    if (minor_mm < 1) bad("minor_mm must be >= 1");
    if (major_mm < minor_mm || major_mm % minor_mm != 0) bad("major_mm must be an integer multiple of minor_mm");
    if (!(row_height_mm > 0.0)) bad("row_height_mm must be positive");
    if (!(gutter_mm >= 0.0) || !(margin_mm >= 0.0) || !(calibration_gap_mm >= 0.0)) bad("spacings must be non-negative");
}

nlohmann::json grid_config_to_json(const GridConfig& c) {
    nlohmann::json j;
    j["px_per_mm"] = c.px_per_mm;
    j["mm_per_s"] = c.mm_per_s;
    j["mm_per_mv"] = c.mm_per_mv;
    j["minor_mm"] = c.minor_mm;
    j["major_mm"] = c.major_mm;
    j["paper"] = rgb_json(c.paper);
    j["minor_line"] = rgb_json(c.minor_line);
    j["major_line"] = rgb_json(c.major_line);
    j["ink"] = rgb_json(c.ink);
    j["row_height_mm"] = c.row_height_mm;
    j["gutter_mm"] = c.gutter_mm;
    j["margin_mm"] = c.margin_mm;
    j["calibration_gap_mm"] = c.calibration_gap_mm;
    j["rhythm_strip"] = c.rhythm_strip;
    return j;
}

GridConfig grid_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::SchemaViolation, "/: grid config must be an object");
    GridConfig c;
    try {
        c.px_per_mm = j.value("px_per_mm", c.px_per_mm);
        c.mm_per_s = j.value("mm_per_s", c.mm_per_s);
        c.mm_per_mv = j.value("mm_per_mv", c.mm_per_mv);
        c.minor_mm = j.value("minor_mm", c.minor_mm);
        c.major_mm = j.value("major_mm", c.major_mm);
        c.row_height_mm = j.value("row_height_mm", c.row_height_mm);
        c.gutter_mm = j.value("gutter_mm", c.gutter_mm);
        c.margin_mm = j.value("margin_mm", c.margin_mm);
        c.calibration_gap_mm = j.value("calibration_gap_mm", c.calibration_gap_mm);
        c.rhythm_strip = j.value("rhythm_strip", c.rhythm_strip);
        c.paper = rgb_from(j, "paper", c.paper);
        c.minor_line = rgb_from(j, "minor_line", c.minor_line);
        c.major_line = rgb_from(j, "major_line", c.major_line);
        c.ink = rgb_from(j, "ink", c.ink);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("/: ") + e.what());
    }
    c.validate();
    return c;
}

PanelPlan plan_layout(const EcgRecord& rec, const GridConfig& cfg) {
    cfg.validate();
    if (rec.fs <= 0 || rec.length() == 0) throw Error(Errc::TooShort, "record is empty");
    const double duration = rec.duration_s();
    const double window = duration / 4.0;
    if (window < 1.0) {
        throw Error(Errc::TooShort, "record of " + std::to_string(duration) + " s cannot fill four 1 s windows");
    }

    const double ppm = cfg.px_per_mm;
    const double cal_mm = kCalibrationSeconds * cfg.mm_per_s;
    const double col0_mm = cfg.margin_mm + cal_mm + cfg.calibration_gap_mm;
    const double col_mm = window * cfg.mm_per_s;
    const int rows = cfg.rhythm_strip ? 4 : 3;

    PanelPlan plan;
    plan.column_seconds = window;
    plan.width_mm = std::ceil(col0_mm + 4.0 * col_mm + 3.0 * cfg.gutter_mm + cfg.margin_mm);
    plan.height_mm = std::ceil(2.0 * cfg.margin_mm + rows * cfg.row_height_mm + (rows - 1) * cfg.gutter_mm);
    plan.width_px = to_px(plan.width_mm, ppm);
    plan.height_px = to_px(plan.height_mm, ppm);

    auto row_top_mm = [&](int r) { return cfg.margin_mm + r * (cfg.row_height_mm + cfg.gutter_mm); };
    auto make_rect = [&](double x_mm, double y_mm, double w_mm, double h_mm) {
        const int x = to_px(x_mm, ppm);
        const int y = to_px(y_mm, ppm);
        return PixelRect{x, y, to_px(x_mm + w_mm, ppm) - x, to_px(y_mm + h_mm, ppm) - y};
    };

    for (int c = 0; c < 4; ++c) {
        for (int r = 0; r < 3; ++r) {
            Panel p;
            p.lead = static_cast<Lead>(c * 3 + r);
            p.row = r;
            p.column = c;
            p.t0 = c * window;
            p.t1 = (c + 1) * window;
            p.rect = make_rect(col0_mm + c * (col_mm + cfg.gutter_mm), row_top_mm(r), col_mm, cfg.row_height_mm);
            p.baseline_y = to_px(row_top_mm(r) + 0.5 * cfg.row_height_mm, ppm);
            plan.panels.push_back(p);
        }
    }
    for (int r = 0; r < rows; ++r) {
        plan.calibration.push_back({make_rect(cfg.margin_mm, row_top_mm(r), cal_mm, cfg.row_height_mm),
                                    to_px(row_top_mm(r) + 0.5 * cfg.row_height_mm, ppm)});
    }
    if (cfg.rhythm_strip) {
        Panel p;
        p.lead = Lead::II;
        p.row = 3;
        p.column = 0;
        p.t0 = 0.0;
        p.t1 = duration;
        p.rect = make_rect(col0_mm, row_top_mm(3), 4.0 * col_mm, cfg.row_height_mm);
        p.baseline_y = to_px(row_top_mm(3) + 0.5 * cfg.row_height_mm, ppm);
        plan.rhythm = p;
    }
    return plan;
}

nlohmann::json panel_plan_to_json(const PanelPlan& plan) {
    auto panel_json = [](const Panel& p) {
        return nlohmann::json{
            {"lead", lead_name(p.lead)},
            {"row", p.row},
            {"column", p.column},
            {"t0", p.t0},
            {"t1", p.t1},
            {"rect", {p.rect.x, p.rect.y, p.rect.width, p.rect.height}},
            {"baseline_y", p.baseline_y},
        };
    };
    nlohmann::json j;
    j["width_px"] = plan.width_px;
    j["height_px"] = plan.height_px;
    j["column_seconds"] = plan.column_seconds;
    nlohmann::json panels = nlohmann::json::array();
    for (const Panel& p : plan.panels) panels.push_back(panel_json(p));
    j["panels"] = std::move(panels);
    if (plan.rhythm) j["rhythm"] = panel_json(*plan.rhythm);
    return j;
}

PaperImage render_grid(const GridConfig& cfg, double width_mm, double height_mm) {
    cfg.validate();
    if (!(width_mm > 0.0) || !(height_mm > 0.0) || !std::isfinite(width_mm) || !std::isfinite(height_mm)) {
        throw Error(Errc::BadDimensions, "paper dimensions must be positive");
    }
    const int w = to_px(width_mm, cfg.px_per_mm);
    const int h = to_px(height_mm, cfg.px_per_mm);
    if (w <= 0 || h <= 0) throw Error(Errc::BadDimensions, "paper rounds to an empty raster");

    PaperImage out{Image(w, h, cfg.paper), cfg.px_per_mm, Quad::image_corners(w, h)};
    Image& img = out.raster;
    const int ratio = cfg.major_mm / cfg.minor_mm;
    // Minor lines first so that major lines overwrite them at crossings.
    for (int pass = 0; pass < 2; ++pass) {
        const bool major_pass = pass == 1;
        const Rgb colour = major_pass ? cfg.major_line : cfg.minor_line;
        for (int k = 0;; ++k) {
            const int x = to_px(k * cfg.minor_mm, cfg.px_per_mm);
            if (x >= w) break;
            if ((k % ratio == 0) != major_pass) continue;
            for (int y = 0; y < h; ++y) img.set(x, y, colour);
        }
        for (int k = 0;; ++k) {
            const int y = to_px(k * cfg.minor_mm, cfg.px_per_mm);
            if (y >= h) break;
            if ((k % ratio == 0) != major_pass) continue;
            for (int x = 0; x < w; ++x) img.set(x, y, colour);
        }
    }
    return out;
}

PaperImage render_record(const EcgRecord& rec, const GridConfig& cfg) {
    const PanelPlan plan = plan_layout(rec, cfg);
    PaperImage out = render_grid(cfg, plan.width_mm, plan.height_mm);
    Image& img = out.raster;
    const double ppm = cfg.px_per_mm;
    const double x_scale = cfg.mm_per_s * ppm;
    const double y_scale = cfg.mm_per_mv * ppm;

    CoverageBuffer cov(img.width(), img.height());

    for (const CalibrationMark& mark : plan.calibration) {
        const PixelRect& cal = mark.rect;
        const double base = mark.baseline_y;
        const double top = base - kCalibrationMillivolts * y_scale;
        const double x0 = cal.x;
        const double x1 = cal.x + kCalibrationSeconds * x_scale;
        const PixelRect clip{cal.x - 1, cal.y, cal.width + 2, cal.height};
        cov.segment(x0, base, x0, top, clip);
        cov.segment(x0, top, x1, top, clip);
        cov.segment(x1, top, x1, base, clip);
    }

    auto draw_panel = [&](const Panel& p) {
        const auto& series = rec.lead(p.lead);
        const auto n = static_cast<long long>(series.size());
        const long long k0 = std::llround(p.t0 * rec.fs);
        const long long k1 = std::min(n - 1, std::llround(p.t1 * rec.fs));
        auto px_x = [&](long long k) { return p.rect.x + (static_cast<double>(k) / rec.fs - p.t0) * x_scale; };
        auto px_y = [&](long long k) { return p.baseline_y - series[static_cast<std::size_t>(k)] * y_scale; };
        if (k1 <= k0) {
            cov.segment(px_x(k0), px_y(k0), px_x(k0), px_y(k0), p.rect);
            return;
        }
        for (long long k = k0; k < k1; ++k) cov.segment(px_x(k), px_y(k), px_x(k + 1), px_y(k + 1), p.rect);
    };
    for (const Panel& p : plan.panels) draw_panel(p);
    if (plan.rhythm) draw_panel(*plan.rhythm);

    cov.composite(img, cfg.ink);

    const int scale = std::max(1, static_cast<int>(std::lround(ppm / 4.0)));
    const int inset = to_px(1.0, ppm);
    for (const Panel& p : plan.panels) {
        draw_text(img, p.rect.x + inset, p.rect.y + inset, lead_name(p.lead), scale, cfg.ink);
    }
    if (plan.rhythm) draw_text(img, plan.rhythm->rect.x + inset, plan.rhythm->rect.y + inset, "II", scale, cfg.ink);
    return out;
}

} // namespace ecgpaper
