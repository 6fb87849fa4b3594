#pragma once

#include "ecgpaper/geometry.hpp"
#include "ecgpaper/image.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ecgpaper {

// ---- CLAHE ----

struct ClaheTiles {
    int rows = 8;
    int cols = 8;
};

using Histogram = std::array<std::uint32_t, 256>;
using Lut = std::array<std::uint8_t, 256>;

/// Bin ceiling for a tile of `tile_pixels`: ceil(clip * tile_pixels / 256), at least 1.
std::uint32_t clip_limit(double clip, std::size_t tile_pixels);

/// Clips every bin at `limit` and hands the excess back uniformly; the
/// remainder that does not divide by 256 goes one count per bin on a stride.
/// Returns the total excess that was redistributed.
std::uint64_t clip_histogram(Histogram& hist, std::uint32_t limit);

/// Equalisation map of a (clipped) histogram. Each level maps to the middle
/// of its cumulative range: round(255 * (cum_below + h[v] / 2) / total).
Lut equalisation_lut(const Histogram& hist);

/// Per-tile LUTs in row-major tile order. Tile (r, c) covers rows
/// [r*H/rows, (r+1)*H/rows) and the same for columns.
std::vector<Lut> tile_luts(std::span<const std::uint8_t> luma, int width, int height, ClaheTiles tiles, double clip);

/// CLAHE on a single 8-bit plane.
std::vector<std::uint8_t> clahe_plane(std::span<const std::uint8_t> luma, int width, int height, ClaheTiles tiles,
                                      double clip);

/// CLAHE on BT.601 luma; each channel is shifted by the luma change so chroma
/// differences survive. Throws Error(TinyImage) or Error(InvalidArgument).
Image clahe(const Image& img, ClaheTiles tiles, double clip);

// ---- Paper detection ----

/// What counts as "paper": bright enough, and either nearly neutral or inside
/// the grid-line hue band (reds and pinks wrapping through 0 degrees).
struct PaperColourModel {
    int min_luma = 60;
    double max_saturation = 0.25;
    double grid_hue_lo = 330.0; // degrees
    double grid_hue_hi = 30.0;
    double grid_max_saturation = 0.6;

    bool is_paper(Rgb c) const;
};

struct PixelBox {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    int area() const { return width * height; }
    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct RectifyConfig {
    int canonical_width = 2000;
    int canonical_height = 800;
    ClaheTiles tiles;
    double clip = 2.0;
    PaperColourModel colour;
    double min_area_fraction = 0.05;
    /// Sub-pixel edge refinement of the hull quad; off gives the raw hull fit.
    bool refine_edges = true;

    void validate() const;
};

nlohmann::json rectify_config_to_json(const RectifyConfig& cfg);
RectifyConfig rectify_config_from_json(const nlohmann::json& j);

/// Bounding box of the largest 4-connected paper-coloured region.
/// Throws Error(NoPaperFound) when it covers less than min_area_fraction.
PixelBox coarse_locate(const Image& img, const RectifyConfig& cfg = {});

/// Paper corners inside `bbox`, ordered TL, TR, BR, BL.
/// Throws Error(NoPaperFound) or Error(DegenerateQuad).
Quad find_corners(const Image& img, const PixelBox& bbox, const RectifyConfig& cfg = {});

/// Convex hull (Andrew's monotone chain), clockwise on screen, no collinear points.
std::vector<Point> convex_hull(std::vector<Point> points);

/// Reduces a convex polygon to four vertices by repeatedly replacing the edge
/// whose removal (extending its two neighbours to meet) adds the least area.
std::vector<Point> fit_quad_to_hull(std::vector<Point> hull);

/// Orders four points TL, TR, BR, BL: angular sort around the centroid,
/// starting from the point with the smallest x + y.
Quad order_corners(std::array<Point, 4> pts);

struct StageTiming {
    std::string stage;
    double ms = 0.0;
};

struct RectifyReport {
    PixelBox bbox;
    Quad corners;
    Homography homography;
    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
};

/// Report JSON {corners, homography, warnings}; timings are left out so the
/// file is reproducible.
nlohmann::json report_to_json(const RectifyReport& report);

/// locate -> corners -> homography onto the canonical rectangle -> warp -> CLAHE.
std::pair<PaperImage, RectifyReport> rectify_pipeline(const Image& img, const RectifyConfig& cfg = {});

/// locate -> crop -> CLAHE.
std::pair<Image, RectifyReport> crop_pipeline(const Image& img, const RectifyConfig& cfg = {});

/// Canonical-frame RMSE of the ground-truth corners carried through H.
double reprojection_rmse(const Homography& h, const Quad& truth, const RectifyConfig& cfg);

} // namespace ecgpaper
