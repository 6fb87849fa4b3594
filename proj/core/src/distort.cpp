#include "ecgpaper/distort.hpp"

#include "ecgpaper/error.hpp"
#include "ecgpaper/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace ecgpaper {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

// Source pixels are unit squares, so the raster spans [-0.5, W - 0.5].
constexpr double kHalfPixel = 0.5;

double to_radians(double deg) {
    return deg * std::numbers::pi / 180.0;
}

std::uint8_t scale_u8(std::uint8_t v, double factor) {
    return clamp_u8(static_cast<double>(v) * factor);
}

} // namespace

Point catmull_rom(Point p0, Point p1, Point p2, Point p3, double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    auto axis = [&](double a, double b, double c, double d) {
        return 0.5 * ((2.0 * b) + (-a + c) * t + (2.0 * a - 5.0 * b + 4.0 * c - d) * t2 + (-a + 3.0 * b - 3.0 * c + d) * t3);
    };
    return {axis(p0.x, p1.x, p2.x, p3.x), axis(p0.y, p1.y, p2.y, p3.y)};
}

std::vector<Point> closed_catmull_rom(std::span<const Point> control, int samples_per_segment) {
    const std::size_t n = control.size();
    if (n < 4) throw Error(Errc::InvalidArgument, "closed Catmull-Rom needs at least 4 control points");
    if (samples_per_segment < 1) throw Error(Errc::InvalidArgument, "samples_per_segment must be >= 1");
    std::vector<Point> out;
    out.reserve(n * static_cast<std::size_t>(samples_per_segment));
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p0 = control[(i + n - 1) % n];
        const Point& p1 = control[i];
        const Point& p2 = control[(i + 1) % n];
        const Point& p3 = control[(i + 2) % n];
        for (int s = 0; s < samples_per_segment; ++s) {
            out.push_back(catmull_rom(p0, p1, p2, p3, static_cast<double>(s) / samples_per_segment));
        }
    }
    return out;
}

std::vector<Point> shadow_control_points(std::uint64_t seed, int n_control, const Bounds& b) {
    if (n_control < 4) throw Error(Errc::InvalidArgument, "shadow needs n_control >= 4");
    Rng rng(seed);
    const double bw = b.x1 - b.x0;
    const double bh = b.y1 - b.y0;
    const Point centre{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
    const double base = rng.uniform(0.2, 0.45) * std::min(bw, bh);
    const double aspect = rng.uniform(1.0, 2.5);
    const double tilt = rng.uniform(0.0, std::numbers::pi);
    const double step = 2.0 * std::numbers::pi / n_control;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n_control));
    for (int i = 0; i < n_control; ++i) {
        const double a = i * step + rng.uniform(-0.3, 0.3) * step;
        const double r = base * rng.uniform(0.6, 1.4);
        // elongated blob, rotated by tilt
        const double ex = r * aspect * std::cos(a);
        const double ey = r * std::sin(a);
        const double x = centre.x + ex * std::cos(tilt) - ey * std::sin(tilt);
        const double y = centre.y + ex * std::sin(tilt) + ey * std::cos(tilt);
        pts.push_back({std::clamp(x, b.x0, b.x1), std::clamp(y, b.y0, b.y1)});
    }
    return pts;
}

std::vector<Point> shadow_polygon(std::uint64_t seed, int n_control, const Bounds& bounds) {
    const auto control = shadow_control_points(seed, n_control, bounds);
    return closed_catmull_rom(control, kShadowSamplesPerSegment);
}

double polygon_area(std::span<const Point> polygon) {
    double s = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * std::abs(s);
}

PaperImage apply_shadow(const PaperImage& img, std::span<const Point> polygon, double intensity, double feather_px) {
    if (!(intensity > 0.0 && intensity <= 1.0)) throw Error(Errc::InvalidArgument, "shadow intensity must lie in (0, 1]");
    if (!(feather_px >= 0.0) || !std::isfinite(feather_px)) throw Error(Errc::InvalidArgument, "feather must be >= 0");
    if (polygon.size() < 3 || polygon_area(polygon) < 1.0) {
        throw Error(Errc::DegeneratePolygon, "shadow polygon area below 1 px^2");
    }

    PaperImage out = img;
    const int w = img.width();
    const int h = img.height();
    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (const Point& p : polygon) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const int rx0 = std::max(0, static_cast<int>(std::floor(minx - feather_px)) - 1);
    const int ry0 = std::max(0, static_cast<int>(std::floor(miny - feather_px)) - 1);
    const int rx1 = std::min(w - 1, static_cast<int>(std::ceil(maxx + feather_px)) + 1);
    const int ry1 = std::min(h - 1, static_cast<int>(std::ceil(maxy + feather_px)) + 1);
    if (rx0 > rx1 || ry0 > ry1) return out;
    const int rw = rx1 - rx0 + 1;
    const int rh = ry1 - ry0 + 1;
    auto idx = [&](int x, int y) { return static_cast<std::size_t>(y - ry0) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(x - rx0); };

    // Even-odd scanline fill at pixel centres.
    std::vector<std::uint8_t> inside(static_cast<std::size_t>(rw) * static_cast<std::size_t>(rh), 0);
    std::vector<double> xs;
    const std::size_t n = polygon.size();
    for (int y = ry0; y <= ry1; ++y) {
        xs.clear();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point& a = polygon[i];
            const Point& b = polygon[j];
            if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int xa = std::max(rx0, static_cast<int>(std::floor(xs[k])) + 1);
            const int xb = std::min(rx1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
            for (int x = xa; x <= xb; ++x) {
                if (x > xs[k] && x < xs[k + 1]) inside[idx(x, y)] = 1;
            }
        }
    }

    std::vector<double> dist;
    if (feather_px > 0.0) {
        dist.assign(inside.size(), std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i) {
            const Point& a = polygon[i];
            const Point& b = polygon[(i + 1) % n];
            const int ex0 = std::max(rx0, static_cast<int>(std::floor(std::min(a.x, b.x) - feather_px)));
            const int ex1 = std::min(rx1, static_cast<int>(std::ceil(std::max(a.x, b.x) + feather_px)));
            const int ey0 = std::max(ry0, static_cast<int>(std::floor(std::min(a.y, b.y) - feather_px)));
            const int ey1 = std::min(ry1, static_cast<int>(std::ceil(std::max(a.y, b.y) + feather_px)));
            const double dx = b.x - a.x;
            const double dy = b.y - a.y;
            const double len2 = dx * dx + dy * dy;
            for (int y = ey0; y <= ey1; ++y) {
                for (int x = ex0; x <= ex1; ++x) {
                    const std::size_t k = idx(x, y);
                    if (inside[k]) continue;
                    double t = len2 > 0.0 ? ((x - a.x) * dx + (y - a.y) * dy) / len2 : 0.0;
                    t = std::clamp(t, 0.0, 1.0);
                    const double d = std::hypot(a.x + t * dx - x, a.y + t * dy - y);
                    if (d < dist[k]) dist[k] = d;
                }
            }
        }
    }

    for (int y = ry0; y <= ry1; ++y) {
        for (int x = rx0; x <= rx1; ++x) {
            const std::size_t k = idx(x, y);
            double factor = 1.0;
            if (inside[k]) {
                factor = 1.0 - intensity;
            } else if (feather_px > 0.0 && dist[k] < feather_px) {
                factor = 1.0 - intensity * (1.0 - dist[k] / feather_px);
            } else {
                continue;
            }
            const Rgb c = img.raster.at(x, y);
            out.raster.set(x, y, {scale_u8(c.r, factor), scale_u8(c.g, factor), scale_u8(c.b, factor)});
        }
    }
    return out;
}

Homography random_homography(std::uint64_t seed, double jitter_frac, int width, int height) {
    if (!(jitter_frac >= 0.0 && jitter_frac <= 0.25)) throw Error(Errc::InvalidArgument, "jitter must lie in [0, 0.25]");
    if (width < 2 || height < 2) throw Error(Errc::BadDimensions, "image too small for a homography");
    const double bound = jitter_frac * std::min(width, height);
    if (bound == 0.0) return Homography::identity();
    const Quad src = Quad::image_corners(width, height);
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(seed, attempt));
        Quad dst = src;
        for (Point& p : dst.pts) {
            const double r = bound * std::sqrt(rng.uniform());
            const double a = 2.0 * std::numbers::pi * rng.uniform();
            p = p + Point{r * std::cos(a), r * std::sin(a)};
        }
        if (!dst.is_convex_clockwise()) continue;
        try {
            return solve_homography(src, dst);
        } catch (const Error&) {
            continue;
        }
    }
}

Image warp_raster(const Image& src, const Homography& h, int canvas_width, int canvas_height, Rgb fill) {
    if (canvas_width <= 0 || canvas_height <= 0) throw Error(Errc::BadDimensions, "canvas must be non-empty");
    const Homography inv = h.inverse();
    Image out(canvas_width, canvas_height, fill);
    const int sw = src.width();
    const int sh = src.height();
    const double maxx = sw - 1;
    const double maxy = sh - 1;
    const auto sbytes = src.bytes();
    auto obytes = out.bytes();
    const auto& m = inv.entries();
    for (int y = 0; y < canvas_height; ++y) {
        for (int x = 0; x < canvas_width; ++x) {
            const double wz = m[6] * x + m[7] * y + m[8];
            if (!(wz > 0.0)) continue;
            double sx = (m[0] * x + m[1] * y + m[2]);
            double sy = (m[3] * x + m[4] * y + m[5]);
            if (wz != 1.0) {
                sx /= wz;
                sy /= wz;
            }
            if (sx < -kHalfPixel || sy < -kHalfPixel || sx > maxx + kHalfPixel || sy > maxy + kHalfPixel) continue;
            sx = std::clamp(sx, 0.0, maxx);
            sy = std::clamp(sy, 0.0, maxy);
            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const double fx = sx - x0;
            const double fy = sy - y0;
            const int x1 = fx > 0.0 ? x0 + 1 : x0;
            const int y1 = fy > 0.0 ? y0 + 1 : y0;
            const std::size_t i00 = (static_cast<std::size_t>(y0) * static_cast<std::size_t>(sw) + static_cast<std::size_t>(x0)) * 3;
            const std::size_t i10 = (static_cast<std::size_t>(y0) * static_cast<std::size_t>(sw) + static_cast<std::size_t>(x1)) * 3;
            const std::size_t i01 = (static_cast<std::size_t>(y1) * static_cast<std::size_t>(sw) + static_cast<std::size_t>(x0)) * 3;
            const std::size_t i11 = (static_cast<std::size_t>(y1) * static_cast<std::size_t>(sw) + static_cast<std::size_t>(x1)) * 3;
            const std::size_t o = (static_cast<std::size_t>(y) * static_cast<std::size_t>(canvas_width) + static_cast<std::size_t>(x)) * 3;
            for (std::size_t c = 0; c < 3; ++c) {
                const double top = sbytes[i00 + c] + fx * (sbytes[i10 + c] - sbytes[i00 + c]);
                const double bot = sbytes[i01 + c] + fx * (sbytes[i11 + c] - sbytes[i01 + c]);
                obytes[o + c] = clamp_u8(top + fy * (bot - top));
            }
        }
    }
    return out;
}

std::pair<PaperImage, Quad> warp(const PaperImage& img, const Homography& h, int canvas_width, int canvas_height,
                                 Rgb fill) {
    if (!h.is_invertible()) throw Error(Errc::SingularHomography, "warp needs an invertible homography");
    PaperImage out;
    out.raster = warp_raster(img.raster, h, canvas_width, canvas_height, fill);
    out.px_per_mm = img.px_per_mm;
    out.corners = h.apply(img.corners);
    const Quad corners = out.corners;
    return {std::move(out), corners};
}

double DisplacementField::max_magnitude() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) m = std::max(m, std::hypot(dx[i], dy[i]));
    return m;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable blur with replicated borders.
void blur(std::vector<double>& plane, int w, int h, const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    std::vector<double> tmp(plane.size());
    for (int y = 0; y < h; ++y) {
        const double* row = &plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(w)];
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                s += kernel[static_cast<std::size_t>(k + radius)] * row[std::clamp(x + k, 0, w - 1)];
            }
            tmp[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = s;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                s += kernel[static_cast<std::size_t>(k + radius)] *
                     tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
            }
            plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = s;
        }
    }
}

} // namespace

DisplacementField elastic_field(int width, int height, double alpha, double sigma, std::uint64_t seed) {
    if (!(alpha >= 0.0)) throw Error(Errc::InvalidArgument, "elastic alpha must be >= 0");
    if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "elastic sigma must be > 0");
    DisplacementField f;
    f.width = width;
    f.height = height;
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    f.dx.assign(n, 0.0);
    f.dy.assign(n, 0.0);
    if (alpha == 0.0 || n == 0) return f;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        f.dx[i] = rng.uniform(-1.0, 1.0);
        f.dy[i] = rng.uniform(-1.0, 1.0);
    }
    const auto kernel = gaussian_kernel(sigma);
    blur(f.dx, width, height, kernel);
    blur(f.dy, width, height, kernel);
    const double m = f.max_magnitude();
    if (m > 0.0) {
        const double s = alpha / m;
        for (std::size_t i = 0; i < n; ++i) {
            f.dx[i] *= s;
            f.dy[i] *= s;
        }
    }
    return f;
}

std::string field_hash(const DisplacementField& field) {
    // Hash of the field quantised to 1e-6 px so the digest names the geometry,
    // not the last bits of the arithmetic.
    std::uint64_t h = fnv1a64(std::to_string(field.width) + "x" + std::to_string(field.height));
    auto mix = [&h](double v) {
        const auto q = static_cast<std::int64_t>(std::llround(v * 1e6));
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>((q >> (8 * b)) & 0xFF);
            h *= 0x100000001B3ULL;
        }
    };
    for (std::size_t i = 0; i < field.dx.size(); ++i) {
        mix(field.dx[i]);
        mix(field.dy[i]);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

PaperImage remap(const PaperImage& img, const DisplacementField& f) {
    PaperImage out = img;
    const int w = img.width();
    const int h = img.height();
    const auto src = img.raster.bytes();
    auto dst = out.raster.bytes();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            const double sx = std::clamp(x + f.dx[i], 0.0, static_cast<double>(w - 1));
            const double sy = std::clamp(y + f.dy[i], 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(sx);
            const int y0 = static_cast<int>(sy);
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double fx = sx - x0;
            const double fy = sy - y0;
            auto at = [&](int xx, int yy, std::size_t c) {
                return static_cast<double>(src[(static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx)) * 3 + c]);
            };
            for (std::size_t c = 0; c < 3; ++c) {
                const double top = at(x0, y0, c) + fx * (at(x1, y0, c) - at(x0, y0, c));
                const double bot = at(x0, y1, c) + fx * (at(x1, y1, c) - at(x0, y1, c));
                dst[i * 3 + c] = clamp_u8(top + fy * (bot - top));
            }
        }
    }
    return out;
}

} // namespace

PaperImage elastic_deform(const PaperImage& img, double alpha, double sigma, std::uint64_t seed) {
    const DisplacementField f = elastic_field(img.width(), img.height(), alpha, sigma, seed);
    if (alpha == 0.0) return img;
    return remap(img, f);
}

PaperImage photometric(const PaperImage& img, double brightness_delta, double contrast_gain) {
    if (!(brightness_delta >= -0.5 && brightness_delta <= 0.5)) throw Error(Errc::InvalidArgument, "brightness delta must lie in [-0.5, 0.5]");
    if (!(contrast_gain >= 0.5 && contrast_gain <= 2.0)) throw Error(Errc::InvalidArgument, "contrast gain must lie in [0.5, 2]");
    PaperImage out = img;
    if (brightness_delta == 0.0 && contrast_gain == 1.0) return out;
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) {
        lut[static_cast<std::size_t>(v)] = clamp_u8(contrast_gain * (v - 128) + 128 + 255.0 * brightness_delta);
    }
    for (auto& b : out.raster.bytes()) b = lut[b];
    return out;
}

PaperImage apply_crease(const PaperImage& img, Point anchor, double angle_deg, double depth, double falloff) {
    if (!(depth >= 0.0 && depth <= 1.0)) throw Error(Errc::InvalidArgument, "crease depth must lie in [0, 1]");
    if (!(falloff > 0.0)) throw Error(Errc::InvalidArgument, "crease falloff must be > 0");
    PaperImage out = img;
    if (depth == 0.0) return out;
    const double a = to_radians(angle_deg);
    const double nx = -std::sin(a);
    const double ny = std::cos(a);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double s = (x - anchor.x) * nx + (y - anchor.y) * ny;
            if (s < 0.0 || s >= falloff) continue;
            const double factor = 1.0 - depth * (1.0 - s / falloff);
            const Rgb c = img.raster.at(x, y);
            out.raster.set(x, y, {scale_u8(c.r, factor), scale_u8(c.g, factor), scale_u8(c.b, factor)});
        }
    }
    return out;
}

namespace {

Bounds quad_bounds(const Quad& q, int w, int h) {
    Bounds b{q[0].x, q[0].y, q[0].x, q[0].y};
    for (const Point& p : q.pts) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    b.x0 = std::clamp(b.x0, 0.0, w - 1.0);
    b.x1 = std::clamp(b.x1, 0.0, w - 1.0);
    b.y0 = std::clamp(b.y0, 0.0, h - 1.0);
    b.y1 = std::clamp(b.y1, 0.0, h - 1.0);
    return b;
}

} // namespace

RecipeResult apply_recipe(const PaperImage& img, const DistortionRecipe& recipe) {
    validate_recipe(recipe);
    RecipeResult result;
    result.realised = recipe;
    PaperImage cur = img;

    const int margin = recipe.margin_px ? *recipe.margin_px
                                        : static_cast<int>(std::lround(recipe.margin * std::min(img.width(), img.height())));
    result.realised.margin_px = margin;
    if (margin > 0) {
        PaperImage padded;
        padded.raster = Image(img.width() + 2 * margin, img.height() + 2 * margin, recipe.background);
        padded.px_per_mm = img.px_per_mm;
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) padded.raster.set(x + margin, y + margin, img.raster.at(x, y));
        }
        const Homography shift = Homography::translation(margin, margin);
        padded.corners = shift.apply(img.corners);
        result.geometric.push_back(shift);
        cur = std::move(padded);
    }

    for (std::size_t i = 0; i < recipe.steps.size(); ++i) {
        const std::uint64_t stream = derive_seed(recipe.seed, i);
        DistortionStep& realised = result.realised.steps[i];
        std::visit(Overloaded{
                       [&](ShadowStep& s) {
                           if (!s.control_points) {
                               s.control_points = shadow_control_points(stream, s.n_control, quad_bounds(cur.corners, cur.width(), cur.height()));
                           }
                           if (s.intensity == 0.0) return;
                           const auto polygon = closed_catmull_rom(*s.control_points, kShadowSamplesPerSegment);
                           cur = apply_shadow(cur, polygon, s.intensity, s.feather);
                       },
                       [&](PerspectiveStep& s) {
                           if (!s.homography) s.homography = random_homography(stream, s.jitter, cur.width(), cur.height());
                           auto [warped, quad] = warp(cur, *s.homography, cur.width(), cur.height(), recipe.background);
                           if (*s.homography != Homography::identity()) cur = std::move(warped);
                           result.geometric.push_back(*s.homography);
                       },
                       [&](RotateStep& s) {
                           if (!s.angle_deg) {
                               Rng rng(stream);
                               s.angle_deg = s.max_deg == 0.0 ? 0.0 : rng.uniform(-s.max_deg, s.max_deg);
                           }
                           const Point centre{(cur.width() - 1) / 2.0, (cur.height() - 1) / 2.0};
                           const Homography rot = Homography::rotation_about(centre, to_radians(*s.angle_deg));
                           if (rot != Homography::identity()) {
                               cur = warp(cur, rot, cur.width(), cur.height(), recipe.background).first;
                           }
                           result.geometric.push_back(rot);
                       },
                       [&](ElasticStep& s) {
                           const DisplacementField f = elastic_field(cur.width(), cur.height(), s.alpha, s.sigma, stream);
                           const std::string hash = field_hash(f);
                           if (s.field_hash && *s.field_hash != hash) {
                               throw Error(Errc::InvalidArgument, "elastic field hash mismatch on replay (step " + std::to_string(i) + ")");
                           }
                           s.field_hash = hash;
                           if (s.alpha > 0.0) cur = remap(cur, f);
                       },
                       [&](CreaseStep& s) {
                           if (!s.anchor || !s.angle_deg) {
                               Rng rng(stream);
                               const Bounds b = quad_bounds(cur.corners, cur.width(), cur.height());
                               const Point anchor{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
                               const double angle = rng.uniform(0.0, 360.0);
                               if (!s.anchor) s.anchor = anchor;
                               if (!s.angle_deg) s.angle_deg = angle;
                           }
                           cur = apply_crease(cur, *s.anchor, *s.angle_deg, s.depth, s.falloff);
                       },
                       [&](PhotometricStep& s) { cur = photometric(cur, s.brightness, s.contrast); },
                   },
                   realised);
    }
    result.corners = cur.corners;
    result.image = std::move(cur);
    return result;
}

} // namespace ecgpaper
