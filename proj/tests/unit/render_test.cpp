#include "ecgpaper/error.hpp"
#include "ecgpaper/render.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

using namespace ecgpaper;

namespace {

// Record whose every lead is the constant `mv`.
EcgRecord flat_record(double mv, double seconds = 10.0, int fs = 500) {
    EcgRecord rec;
    rec.id = "flat";
    rec.fs = fs;
    for (auto& lead : rec.leads) lead.assign(static_cast<std::size_t>(seconds * fs), mv);
    return rec;
}

bool is_ink_like(Rgb c) {
    return luma601(c) < 120;
}

} // namespace

TEST(Layout, TenSecondStripPageSize) {
    const PanelPlan plan = plan_layout(flat_record(0.0));
    // 5 margin + 5 calibration + 2 gap + 4 * 62.5 + 3 * 5 + 5 margin = 282 mm; 3 rows of 30 + 2 gutters + margins = 110 mm
    EXPECT_DOUBLE_EQ(plan.width_mm, 282.0);
    EXPECT_DOUBLE_EQ(plan.height_mm, 110.0);
    EXPECT_EQ(plan.width_px, 2256);
    EXPECT_EQ(plan.height_px, 880);
    EXPECT_DOUBLE_EQ(plan.column_seconds, 2.5);
    ASSERT_EQ(plan.panels.size(), 12u);
    EXPECT_EQ(plan.panels[0].lead, Lead::I);
    EXPECT_EQ(plan.panels[3].lead, Lead::aVR);
    EXPECT_EQ(plan.panels[3].column, 1);
    EXPECT_EQ(plan.panels[11].lead, Lead::V6);
    EXPECT_EQ(plan.calibration.size(), 3u);
}

TEST(Layout, PanelsDoNotOverlap) {
    const PanelPlan plan = plan_layout(flat_record(0.0));
    for (std::size_t i = 0; i < plan.panels.size(); ++i) {
        for (std::size_t j = i + 1; j < plan.panels.size(); ++j) {
            const PixelRect& a = plan.panels[i].rect;
            const PixelRect& b = plan.panels[j].rect;
            const bool apart = a.x + a.width <= b.x || b.x + b.width <= a.x || a.y + a.height <= b.y || b.y + b.height <= a.y;
            EXPECT_TRUE(apart) << i << " vs " << j;
        }
    }
}

TEST(Layout, RhythmStripAddsRow) {
    GridConfig cfg;
    cfg.rhythm_strip = true;
    const PanelPlan plan = plan_layout(flat_record(0.0), cfg);
    ASSERT_TRUE(plan.rhythm.has_value());
    EXPECT_EQ(plan.rhythm->lead, Lead::II);
    EXPECT_DOUBLE_EQ(plan.height_mm, 145.0);
}

TEST(Layout, TooShortRecord) {
    try {
        (void)plan_layout(flat_record(0.0, 3.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooShort);
    }
}

TEST(Grid, LinesAtMillimetreSpacing) {
    GridConfig cfg;
    const PaperImage g = render_grid(cfg, 20, 10);
    EXPECT_EQ(g.width(), 160);
    EXPECT_EQ(g.height(), 80);
    EXPECT_EQ(g.raster.at(0, 3), cfg.major_line);
    EXPECT_EQ(g.raster.at(40, 3), cfg.major_line);
    EXPECT_EQ(g.raster.at(8, 3), cfg.minor_line);
    EXPECT_EQ(g.raster.at(4, 3), cfg.paper);
    EXPECT_EQ(g.raster.at(8, 40), cfg.major_line); // horizontal major at 5 mm
    EXPECT_EQ(g.corners, Quad::image_corners(160, 80));
}

TEST(Grid, RejectsBadConfig) {
    GridConfig cfg;
    cfg.px_per_mm = 2;
    EXPECT_THROW((void)render_grid(cfg, 10, 10), Error);
    cfg = {};
    cfg.major_mm = 3;
    cfg.minor_mm = 2;
    EXPECT_THROW(cfg.validate(), Error);
}

TEST(Render, TraceSitsAtAmplitudeTimesGain) {
    // A flat 1 mV trace must be drawn 10 mm (80 px) above each baseline.
    const EcgRecord rec = flat_record(1.0);
    const PaperImage img = render_record(rec);
    const PanelPlan plan = plan_layout(rec);
    for (const Panel& p : plan.panels) {
        const int x = p.rect.x + p.rect.width / 2;
        const int y = p.baseline_y - 80;
        EXPECT_TRUE(is_ink_like(img.raster.at(x, y))) << lead_name(p.lead);
        EXPECT_FALSE(is_ink_like(img.raster.at(x, p.baseline_y))) << lead_name(p.lead);
    }
}

TEST(Render, CalibrationPulseIsOneMillivoltTall) {
    const EcgRecord rec = flat_record(0.0);
    const PaperImage img = render_record(rec);
    const PanelPlan plan = plan_layout(rec);
    const CalibrationMark& cal = plan.calibration[0];
    const int mid_x = cal.rect.x + 20; // inside the 200 ms (40 px) pulse
    EXPECT_TRUE(is_ink_like(img.raster.at(mid_x, cal.baseline_y - 80)));
    EXPECT_FALSE(is_ink_like(img.raster.at(mid_x, cal.baseline_y - 40)));
    EXPECT_TRUE(is_ink_like(img.raster.at(cal.rect.x, cal.baseline_y - 40)));
}

TEST(Render, DeterministicAndCornersAreImageCorners) {
    const EcgRecord rec = synthesize_record("d", 3, 500, 10.0);
    const PaperImage a = render_record(rec);
    EXPECT_EQ(a.raster, render_record(rec).raster);
    EXPECT_EQ(a.corners, Quad::image_corners(a.width(), a.height()));
    EXPECT_DOUBLE_EQ(a.px_per_mm, 8.0);
}

TEST(Render, GridConfigJsonRoundTrip) {
    GridConfig cfg;
    cfg.px_per_mm = 6;
    cfg.rhythm_strip = true;
    cfg.ink = {1, 2, 3};
    EXPECT_EQ(grid_config_from_json(grid_config_to_json(cfg)), cfg);
    EXPECT_THROW((void)grid_config_from_json(nlohmann::json{{"px_per_mm", "big"}}), Error);
}
