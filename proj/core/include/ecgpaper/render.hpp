#pragma once

#include "ecgpaper/image.hpp"
#include "ecgpaper/waveform.hpp"

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ecgpaper {

/// Physical layout of the paper. Clinical conventions by default: 25 mm/s,
/// 10 mm/mV, 1 mm minor and 5 mm major grid.
struct GridConfig {
    double px_per_mm = 8.0;
    double mm_per_s = 25.0;
    double mm_per_mv = 10.0;
    int minor_mm = 1;
    int major_mm = 5;
    Rgb paper{255, 250, 245};
    Rgb minor_line{246, 200, 200};
    Rgb major_line{232, 140, 140};
    Rgb ink{20, 20, 20};

    double row_height_mm = 30.0;
    double gutter_mm = 5.0;
    double margin_mm = 5.0;
    double calibration_gap_mm = 2.0;
    bool rhythm_strip = false;

    /// Throws Error(InvalidArgument) when an invariant fails.
    void validate() const;
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

nlohmann::json grid_config_to_json(const GridConfig& cfg);
GridConfig grid_config_from_json(const nlohmann::json& j);

struct PixelRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    bool contains(int px, int py) const { return px >= x && py >= y && px < x + width && py < y + height; }
    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct Panel {
    Lead lead = Lead::I;
    int row = 0;
    int column = 0;
    double t0 = 0.0; // seconds, inclusive
    double t1 = 0.0; // seconds, exclusive
    PixelRect rect;
    int baseline_y = 0;
};

struct CalibrationMark {
    PixelRect rect;
    int baseline_y = 0;
};

struct PanelPlan {
    int width_px = 0;
    int height_px = 0;
    double width_mm = 0.0;
    double height_mm = 0.0;
    double column_seconds = 0.0;
    /// Twelve panels in 3 rows x 4 columns; column c holds leads 3c..3c+2.
    std::vector<Panel> panels;
    std::optional<Panel> rhythm;
    /// One 1 mV x 200 ms pulse per row, drawn left of the first column.
    std::vector<CalibrationMark> calibration;
};

/// Splits the record into four equal windows (>= 1 s each) and places the
/// panels on the page. Throws Error(TooShort).
PanelPlan plan_layout(const EcgRecord& rec, const GridConfig& cfg = {});

nlohmann::json panel_plan_to_json(const PanelPlan& plan);

/// Blank paper with minor/major grid lines anchored at the top-left corner.
PaperImage render_grid(const GridConfig& cfg, double width_mm, double height_mm);

/// Full paper ECG: grid, calibration pulses, lead labels and traces.
PaperImage render_record(const EcgRecord& rec, const GridConfig& cfg = {});

/// Draws text with the built-in 5x7 glyphs; `scale` pixels per glyph cell.
void draw_text(Image& img, int x, int y, std::string_view text, int scale, Rgb colour);

} // namespace ecgpaper
