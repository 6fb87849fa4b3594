#include "ecgpaper/rectify.hpp"

#include "ecgpaper/distort.hpp"
#include "ecgpaper/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace ecgpaper {

bool PaperColourModel::is_paper(Rgb c) const {
    if (luma601(c) < min_luma) return false;
    const int hi = std::max({c.r, c.g, c.b});
    const int lo = std::min({c.r, c.g, c.b});
    if (hi == 0) return false;
    const double sat = static_cast<double>(hi - lo) / hi;
    if (sat <= max_saturation) return true;
    if (sat > grid_max_saturation) return false;
    double hue = 0.0;
    const double d = hi - lo;
    if (hi == c.r) {
        hue = 60.0 * std::fmod((c.g - c.b) / d + 6.0, 6.0);
    } else if (hi == c.g) {
        hue = 60.0 * ((c.b - c.r) / d + 2.0);
    } else {
        hue = 60.0 * ((c.r - c.g) / d + 4.0);
    }
    if (grid_hue_lo <= grid_hue_hi) return hue >= grid_hue_lo && hue <= grid_hue_hi;
    return hue >= grid_hue_lo || hue <= grid_hue_hi;
}

void RectifyConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidArgument, what); };
    if (canonical_width < 2 || canonical_height < 2) bad("canonical dimensions must be >= 2");
    if (tiles.rows < 1 || tiles.cols < 1) bad("clahe_tiles must be >= (1, 1)");
    if (!(clip >= 1.0)) bad("clahe_clip must be >= 1");
    if (!(min_area_fraction > 0.0 && min_area_fraction <= 1.0)) bad("min_area_fraction must lie in (0, 1]");
    if (colour.min_luma < 0 || colour.min_luma > 255) bad("min_luma must lie in [0, 255]");
}

nlohmann::json rectify_config_to_json(const RectifyConfig& c) {
    return {
        {"canonical_width", c.canonical_width},
        {"canonical_height", c.canonical_height},
        {"clahe_tiles", {c.tiles.rows, c.tiles.cols}},
        {"clahe_clip", c.clip},
        {"min_area_fraction", c.min_area_fraction},
        {"refine_edges", c.refine_edges},
        {"colour",
         {{"min_luma", c.colour.min_luma},
          {"max_saturation", c.colour.max_saturation},
          {"grid_hue_lo", c.colour.grid_hue_lo},
          {"grid_hue_hi", c.colour.grid_hue_hi},
          {"grid_max_saturation", c.colour.grid_max_saturation}}},
    };
}

RectifyConfig rectify_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Errc::SchemaViolation, "/: rectify config must be an object");
    RectifyConfig c;
    try {
        c.canonical_width = j.value("canonical_width", c.canonical_width);
        c.canonical_height = j.value("canonical_height", c.canonical_height);
        c.clip = j.value("clahe_clip", c.clip);
        c.min_area_fraction = j.value("min_area_fraction", c.min_area_fraction);
        c.refine_edges = j.value("refine_edges", c.refine_edges);
        if (j.contains("clahe_tiles")) {
            const auto& t = j.at("clahe_tiles");
            if (!t.is_array() || t.size() != 2) throw Error(Errc::SchemaViolation, "/clahe_tiles: expected [rows, cols]");
            c.tiles = {t[0].get<int>(), t[1].get<int>()};
        }
        if (j.contains("colour")) {
            const auto& m = j.at("colour");
            c.colour.min_luma = m.value("min_luma", c.colour.min_luma);
            c.colour.max_saturation = m.value("max_saturation", c.colour.max_saturation);
            c.colour.grid_hue_lo = m.value("grid_hue_lo", c.colour.grid_hue_lo);
            c.colour.grid_hue_hi = m.value("grid_hue_hi", c.colour.grid_hue_hi);
            c.colour.grid_max_saturation = m.value("grid_max_saturation", c.colour.grid_max_saturation);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("/: ") + e.what());
    }
    c.validate();
    return c;
}

namespace {

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> on;

    bool at(int x, int y) const { return on[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] != 0; }
};

Mask paper_mask(const Image& img, const PixelBox& box, const PaperColourModel& model) {
    Mask m{box.width, box.height, std::vector<std::uint8_t>(static_cast<std::size_t>(box.area()), 0)};
    for (int y = 0; y < box.height; ++y) {
        for (int x = 0; x < box.width; ++x) {
            m.on[static_cast<std::size_t>(y) * static_cast<std::size_t>(box.width) + static_cast<std::size_t>(x)] =
                model.is_paper(img.at(box.x + x, box.y + y)) ? 1 : 0;
        }
    }
    return m;
}

// Largest 4-connected component; returns its pixels as a mask (empty if none).
Mask largest_component(const Mask& m, std::size_t& pixels) {
    const std::size_t n = m.on.size();
    std::vector<std::int32_t> label(n, -1);
    std::vector<std::size_t> stack;
    std::int32_t best = -1;
    std::size_t best_size = 0;
    std::int32_t next = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (!m.on[start] || label[start] >= 0) continue;
        std::size_t size = 0;
        label[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            ++size;
            const int x = static_cast<int>(i % static_cast<std::size_t>(m.width));
            const int y = static_cast<int>(i / static_cast<std::size_t>(m.width));
            auto visit = [&](int xx, int yy) {
                if (xx < 0 || yy < 0 || xx >= m.width || yy >= m.height) return;
                const std::size_t k = static_cast<std::size_t>(yy) * static_cast<std::size_t>(m.width) + static_cast<std::size_t>(xx);
                if (m.on[k] && label[k] < 0) {
                    label[k] = next;
                    stack.push_back(k);
                }
            };
            visit(x - 1, y);
            visit(x + 1, y);
            visit(x, y - 1);
            visit(x, y + 1);
        }
        if (size > best_size) {
            best_size = size;
            best = next;
        }
        ++next;
    }
    pixels = best_size;
    Mask out{m.width, m.height, std::vector<std::uint8_t>(n, 0)};
    if (best < 0) return out;
    for (std::size_t i = 0; i < n; ++i) out.on[i] = label[i] == best ? 1 : 0;
    return out;
}

std::optional<Point> intersect(Point a0, Point a1, Point b0, Point b1) {
    const Point da = a1 - a0;
    const Point db = b1 - b0;
    const double den = da.x * db.y - da.y * db.x;
    if (std::abs(den) < 1e-12 * (std::hypot(da.x, da.y) * std::hypot(db.x, db.y) + 1e-300)) return std::nullopt;
    const Point w = b0 - a0;
    const double t = (w.x * db.y - w.y * db.x) / den;
    return a0 + t * da;
}

double bilinear_luma(const std::vector<std::uint8_t>& luma, int w, int h, double x, double y) {
    x = std::clamp(x, 0.0, w - 1.0);
    y = std::clamp(y, 0.0, h - 1.0);
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    auto at = [&](int xx, int yy) { return static_cast<double>(luma[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx)]); };
    const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
    const double bot = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
    return top + fy * (bot - top);
}

struct Line {
    Point p; // a point on the line
    Point d; // unit direction
};

// Total least squares through `pts`.
Line fit_line(const std::vector<Point>& pts) {
    Point mean{};
    for (const Point& p : pts) mean = mean + p;
    mean = (1.0 / static_cast<double>(pts.size())) * mean;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const Point& p : pts) {
        const Point q = p - mean;
        sxx += q.x * q.x;
        syy += q.y * q.y;
        sxy += q.x * q.y;
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return {mean, {std::cos(angle), std::sin(angle)}};
}

double line_distance(const Line& l, Point p) {
    const Point q = p - l.p;
    return std::abs(q.x * l.d.y - q.y * l.d.x);
}

constexpr int kProfileReach = 6;     // px either side of the hull edge
constexpr double kProfileStep = 0.25; // px
constexpr double kMinContrast = 20.0; // luma levels between paper and background

// Sub-pixel samples of one paper edge: along the hull edge a -> b, find where
// the luma profile across the edge crosses halfway between the local paper
// and background levels. `outward` points away from the paper.
std::vector<Point> edge_samples(const std::vector<std::uint8_t>& luma, int w, int h, Point a, Point b, Point outward) {
    std::vector<Point> out;
    const double len = distance(a, b);
    if (len < 8.0) return out;
    const int count = std::clamp(static_cast<int>(len / 3.0), 8, 400);
    const int steps = static_cast<int>(2 * kProfileReach / kProfileStep) + 1;
    std::vector<double> profile(static_cast<std::size_t>(steps));
    for (int i = 0; i < count; ++i) {
        const double t = 0.1 + 0.8 * (i + 0.5) / count;
        const Point base = a + t * (b - a);
        for (int k = 0; k < steps; ++k) {
            const double s = -kProfileReach + k * kProfileStep;
            const Point q = base + s * outward;
            if (q.x < 0 || q.y < 0 || q.x > w - 1 || q.y > h - 1) {
                profile[static_cast<std::size_t>(k)] = std::numeric_limits<double>::quiet_NaN();
            } else {
                profile[static_cast<std::size_t>(k)] = bilinear_luma(luma, w, h, q.x, q.y);
            }
        }
        const int band = static_cast<int>(2.0 / kProfileStep);
        double inside = 0.0, outside = 0.0;
        bool ok = true;
        for (int k = 0; k < band; ++k) {
            inside += profile[static_cast<std::size_t>(k)];
            outside += profile[static_cast<std::size_t>(steps - 1 - k)];
        }
        inside /= band;
        outside /= band;
        if (!std::isfinite(inside) || !std::isfinite(outside) || inside - outside < kMinContrast) ok = false;
        if (!ok) continue;
        const double level = 0.5 * (inside + outside);
        // the crossing closest to the hull edge (s = 0)
        double best_s = std::numeric_limits<double>::infinity();
        for (int k = 0; k + 1 < steps; ++k) {
            const double v0 = profile[static_cast<std::size_t>(k)];
            const double v1 = profile[static_cast<std::size_t>(k + 1)];
            if (v0 >= level && v1 < level) {
                const double s = -kProfileReach + (k + (v0 - level) / (v0 - v1)) * kProfileStep;
                if (std::abs(s) < std::abs(best_s)) best_s = s;
            }
        }
        if (std::isfinite(best_s)) out.push_back(base + best_s * outward);
    }
    return out;
}

// Replaces hull-fit corners by intersections of lines fitted to sub-pixel edge
// samples. Corners are pixel-centre coordinates, so the fitted intensity edge
// (the outer boundary of the border pixels) is pulled half a pixel inward.
std::optional<Quad> refine_quad(const Image& img, const Quad& q) {
    const auto luma = luma_plane(img);
    std::array<Line, 4> lines;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point a = q[i];
        const Point b = q[(i + 1) % 4];
        const Point d = b - a;
        const double len = std::hypot(d.x, d.y);
        if (len < 1e-9) return std::nullopt;
        const Point outward{d.y / len, -d.x / len};
        auto pts = edge_samples(luma, img.width(), img.height(), a, b, outward);
        if (pts.size() < 6) return std::nullopt;
        Line l = fit_line(pts);
        // one round of outlier rejection
        std::vector<Point> kept;
        for (const Point& p : pts) {
            if (line_distance(l, p) < 1.0) kept.push_back(p);
        }
        if (kept.size() < 6) return std::nullopt;
        l = fit_line(kept);
        l.p = l.p - 0.5 * outward;
        lines[i] = l;
    }
    Quad out;
    for (std::size_t i = 0; i < 4; ++i) {
        const Line& prev = lines[(i + 3) % 4];
        const Line& cur = lines[i];
        const auto x = intersect(prev.p, prev.p + prev.d, cur.p, cur.p + cur.d);
        if (!x) return std::nullopt;
        out[i] = *x;
    }
    if (!out.is_convex_clockwise()) return std::nullopt;
    for (std::size_t i = 0; i < 4; ++i) {
        if (distance(out[i], q[i]) > 6.0) return std::nullopt;
    }
    return out;
}

} // namespace

PixelBox coarse_locate(const Image& img, const RectifyConfig& cfg) {
    if (img.empty()) throw Error(Errc::NoPaperFound, "empty image");
    const PixelBox whole{0, 0, img.width(), img.height()};
    const Mask m = paper_mask(img, whole, cfg.colour);
    std::size_t pixels = 0;
    const Mask c = largest_component(m, pixels);
    if (pixels == 0) throw Error(Errc::NoPaperFound, "no paper-coloured pixels");
    int x0 = c.width, y0 = c.height, x1 = -1, y1 = -1;
    for (int y = 0; y < c.height; ++y) {
        for (int x = 0; x < c.width; ++x) {
            if (!c.at(x, y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    const PixelBox box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    const double frac = static_cast<double>(box.area()) / static_cast<double>(whole.area());
    if (frac < cfg.min_area_fraction) {
        throw Error(Errc::NoPaperFound, "largest paper region covers " + std::to_string(frac) + " of the image");
    }
    return box;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

std::vector<Point> fit_quad_to_hull(std::vector<Point> poly) {
    if (poly.size() < 4) throw Error(Errc::DegenerateQuad, "hull has fewer than 4 vertices");
    while (poly.size() > 4) {
        const std::size_t m = poly.size();
        double best_area = std::numeric_limits<double>::infinity();
        std::size_t best = m;
        Point best_x{};
        for (std::size_t i = 0; i < m; ++i) {
            const Point& prev = poly[(i + m - 1) % m];
            const Point& a = poly[i];
            const Point& b = poly[(i + 1) % m];
            const Point& next = poly[(i + 2) % m];
            const auto x = intersect(prev, a, next, b);
            if (!x) continue;
            // X must lie beyond a along prev->a and beyond b along next->b
            const Point da = a - prev;
            const Point db = b - next;
            if ((*x - a).x * da.x + (*x - a).y * da.y < 0) continue;
            if ((*x - b).x * db.x + (*x - b).y * db.y < 0) continue;
            const double added = 0.5 * std::abs(cross(a, b, *x));
            if (added < best_area) {
                best_area = added;
                best = i;
                best_x = *x;
            }
        }
        if (best == m) {
            // No edge can be collapsed outward; drop the vertex cutting the least area.
            double least = std::numeric_limits<double>::infinity();
            std::size_t drop = 0;
            for (std::size_t i = 0; i < m; ++i) {
                const double cut = 0.5 * std::abs(cross(poly[(i + m - 1) % m], poly[i], poly[(i + 1) % m]));
                if (cut < least) {
                    least = cut;
                    drop = i;
                }
            }
            poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(drop));
            continue;
        }
        poly[best] = best_x;
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>((best + 1) % m));
    }
    return poly;
}

Quad order_corners(std::array<Point, 4> pts) {
    const Point c = 0.25 * (pts[0] + pts[1] + pts[2] + pts[3]);
    std::sort(pts.begin(), pts.end(), [c](Point a, Point b) {
        return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
    });
    std::size_t start = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (pts[i].x + pts[i].y < pts[start].x + pts[start].y) start = i;
    }
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) q[i] = pts[(start + i) % 4];
    return q;
}

Quad find_corners(const Image& img, const PixelBox& bbox, const RectifyConfig& cfg) {
    const int x0 = std::max(0, bbox.x - 2);
    const int y0 = std::max(0, bbox.y - 2);
    const int x1 = std::min(img.width(), bbox.x + bbox.width + 2);
    const int y1 = std::min(img.height(), bbox.y + bbox.height + 2);
    if (x1 <= x0 || y1 <= y0) throw Error(Errc::NoPaperFound, "empty search box");
    const PixelBox box{x0, y0, x1 - x0, y1 - y0};
    std::size_t pixels = 0;
    const Mask c = largest_component(paper_mask(img, box, cfg.colour), pixels);
    if (pixels == 0) throw Error(Errc::NoPaperFound, "no paper-coloured pixels inside the box");

    std::vector<Point> boundary;
    for (int y = 0; y < c.height; ++y) {
        int lo = -1, hi = -1;
        for (int x = 0; x < c.width; ++x) {
            if (c.at(x, y)) {
                if (lo < 0) lo = x;
                hi = x;
            }
        }
        if (lo < 0) continue;
        boundary.push_back({static_cast<double>(x0 + lo), static_cast<double>(y0 + y)});
        if (hi != lo) boundary.push_back({static_cast<double>(x0 + hi), static_cast<double>(y0 + y)});
    }
    const auto hull = convex_hull(std::move(boundary));
    double hull_area = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) hull_area += cross({0, 0}, hull[i], hull[(i + 1) % hull.size()]);
    hull_area *= 0.5;
    if (hull.size() < 4 || hull_area < 0.01 * box.area() || hull_area < 16.0) {
        throw Error(Errc::DegenerateQuad, "paper region hull is nearly collinear");
    }
    const auto four = fit_quad_to_hull(hull);
    Quad q = order_corners({four[0], four[1], four[2], four[3]});
    if (!q.is_convex_clockwise()) throw Error(Errc::DegenerateQuad, "fitted quad is not convex");
    if (cfg.refine_edges) {
        if (auto refined = refine_quad(img, q)) q = *refined;
    }
    return q;
}

nlohmann::json report_to_json(const RectifyReport& r) {
    nlohmann::json corners = nlohmann::json::array();
    for (const Point& p : r.corners.pts) corners.push_back({p.x, p.y});
    nlohmann::json h = nlohmann::json::array();
    for (int row = 0; row < 3; ++row) h.push_back({r.homography(row, 0), r.homography(row, 1), r.homography(row, 2)});
    return {{"corners", corners}, {"homography", h}, {"warnings", r.warnings}};
}

namespace {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}

    void lap(const char* stage) {
        const auto now = std::chrono::steady_clock::now();
        sink_.push_back({stage, std::chrono::duration<double, std::milli>(now - start_).count()});
        start_ = now;
    }

private:
    std::vector<StageTiming>& sink_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace

std::pair<PaperImage, RectifyReport> rectify_pipeline(const Image& img, const RectifyConfig& cfg) {
    cfg.validate();
    RectifyReport report;
    StageClock clock(report.timings);
    report.bbox = coarse_locate(img, cfg);
    clock.lap("coarse_locate");
    report.corners = find_corners(img, report.bbox, cfg);
    clock.lap("find_corners");
    for (const Point& p : report.corners.pts) {
        if (p.x < 1.0 || p.y < 1.0 || p.x > img.width() - 2.0 || p.y > img.height() - 2.0) {
            report.warnings.push_back("corner on or beyond the image border; the page may be cut off");
            break;
        }
    }
    const Quad canonical = Quad::image_corners(cfg.canonical_width, cfg.canonical_height);
    report.homography = solve_homography(report.corners, canonical);
    clock.lap("solve_homography");
    PaperImage out;
    out.raster = warp_raster(img, report.homography, cfg.canonical_width, cfg.canonical_height, Rgb{0, 0, 0});
    out.corners = canonical;
    clock.lap("warp");
    out.raster = clahe(out.raster, cfg.tiles, cfg.clip);
    clock.lap("clahe");
    return {std::move(out), std::move(report)};
}

std::pair<Image, RectifyReport> crop_pipeline(const Image& img, const RectifyConfig& cfg) {
    cfg.validate();
    RectifyReport report;
    StageClock clock(report.timings);
    report.bbox = coarse_locate(img, cfg);
    clock.lap("coarse_locate");
    const PixelBox& b = report.bbox;
    report.corners = Quad{{Point{double(b.x), double(b.y)}, Point{double(b.x + b.width - 1), double(b.y)},
                           Point{double(b.x + b.width - 1), double(b.y + b.height - 1)},
                           Point{double(b.x), double(b.y + b.height - 1)}}};
    report.homography = Homography::translation(-b.x, -b.y);
    Image out = img.crop(b.x, b.y, b.width, b.height);
    clock.lap("crop");
    out = clahe(out, cfg.tiles, cfg.clip);
    clock.lap("clahe");
    return {std::move(out), std::move(report)};
}

double reprojection_rmse(const Homography& h, const Quad& truth, const RectifyConfig& cfg) {
    return corner_rmse(h.apply(truth), Quad::image_corners(cfg.canonical_width, cfg.canonical_height));
}

} // namespace ecgpaper
