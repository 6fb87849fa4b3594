#pragma once

#include "ecgpaper/geometry.hpp"
#include "ecgpaper/image.hpp"
#include "ecgpaper/recipe.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ecgpaper {

/// Uniform Catmull-Rom (tension 1/2) between p1 (t = 0) and p2 (t = 1).
Point catmull_rom(Point p0, Point p1, Point p2, Point p3, double t);

/// Samples the closed spline through `control` (indices wrap), with
/// `samples_per_segment` points per segment starting at each knot.
std::vector<Point> closed_catmull_rom(std::span<const Point> control, int samples_per_segment);

inline constexpr int kShadowSamplesPerSegment = 16;

struct Bounds {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

/// Star-shaped ring of n_control points inside `bounds`, deterministic per seed.
std::vector<Point> shadow_control_points(std::uint64_t seed, int n_control, const Bounds& bounds);

/// Closed shadow outline: Catmull-Rom through shadow_control_points.
/// Throws Error(InvalidArgument) when n_control < 4.
std::vector<Point> shadow_polygon(std::uint64_t seed, int n_control, const Bounds& bounds);

double polygon_area(std::span<const Point> polygon);

/// Multiplies pixels strictly inside the polygon by (1 - intensity); outside
/// pixels within feather_px of the outline ramp linearly back to 1.
/// Throws Error(InvalidArgument) or Error(DegeneratePolygon).
PaperImage apply_shadow(const PaperImage& img, std::span<const Point> polygon, double intensity, double feather_px);

/// Maps the W x H image corners to corners displaced by at most
/// jitter_frac * min(W, H), each uniformly within that disc.
Homography random_homography(std::uint64_t seed, double jitter_frac, int width, int height);

/// Inverse-mapped bilinear resampling onto a canvas. Source pixels are unit
/// squares: a preimage within half a pixel of the border samples the edge
/// pixel, anything further out takes `fill`.
Image warp_raster(const Image& src, const Homography& h, int canvas_width, int canvas_height, Rgb fill);

/// Warps the raster and returns H applied to the input's corners.
std::pair<PaperImage, Quad> warp(const PaperImage& img, const Homography& h, int canvas_width, int canvas_height,
                                 Rgb fill);

struct DisplacementField {
    int width = 0;
    int height = 0;
    std::vector<double> dx;
    std::vector<double> dy;

    double max_magnitude() const;
};

/// Gaussian-smoothed uniform noise scaled so its largest magnitude is alpha.
DisplacementField elastic_field(int width, int height, double alpha, double sigma, std::uint64_t seed);
std::string field_hash(const DisplacementField& field);

PaperImage elastic_deform(const PaperImage& img, double alpha, double sigma, std::uint64_t seed);

/// v' = clamp(gain * (v - 128) + 128 + 255 * delta), per channel.
PaperImage photometric(const PaperImage& img, double brightness_delta, double contrast_gain);

/// Darkens the side of the line (anchor, angle_deg) that the normal
/// (-sin, cos) points into: by `depth` at the line, fading to 0 at `falloff` px.
PaperImage apply_crease(const PaperImage& img, Point anchor, double angle_deg, double depth, double falloff);

struct RecipeResult {
    PaperImage image;
    Quad corners;
    DistortionRecipe realised;
    /// Every transform that moved the corners, in application order.
    std::vector<Homography> geometric;
};

/// Runs the steps in order with per-step random streams derived from the
/// recipe seed. Realised values already present in the recipe are reused,
/// so applying `realised` reproduces the output bit for bit.
RecipeResult apply_recipe(const PaperImage& img, const DistortionRecipe& recipe);

} // namespace ecgpaper
