#include "ecgpaper/error.hpp"
#include "ecgpaper/rectify.hpp"

#include <algorithm>
#include <cmath>

namespace ecgpaper {

std::uint32_t clip_limit(double clip, std::size_t tile_pixels) {
    const double raw = std::ceil(clip * static_cast<double>(tile_pixels) / 256.0);
    return static_cast<std::uint32_t>(std::max(1.0, std::min(raw, 4294967295.0)));
}

std::uint64_t clip_histogram(Histogram& hist, std::uint32_t limit) {
    std::uint64_t excess = 0;
    for (auto& h : hist) {
        if (h > limit) {
            excess += h - limit;
            h = limit;
        }
    }
    if (excess == 0) return 0;
    const auto batch = static_cast<std::uint32_t>(excess / 256);
    const auto residual = static_cast<std::size_t>(excess % 256);
    for (auto& h : hist) h += batch;
    if (residual > 0) {
        const std::size_t step = std::max<std::size_t>(256 / residual, 1);
        for (std::size_t i = 0, left = residual; i < 256 && left > 0; i += step, --left) ++hist[i];
    }
    return excess;
}

Lut equalisation_lut(const Histogram& hist) {
    std::uint64_t total = 0;
    for (auto h : hist) total += h;
    Lut lut{};
    if (total == 0) {
        for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(v);
        return lut;
    }
    std::uint64_t below = 0;
    for (std::size_t v = 0; v < 256; ++v) {
        // 255 * (below + h/2) / total, rounded half up, in integers
        const std::uint64_t num = 255 * (2 * below + hist[v]) + total;
        lut[v] = static_cast<std::uint8_t>(std::min<std::uint64_t>(255, num / (2 * total)));
        below += hist[v];
    }
    return lut;
}

namespace {

struct Span {
    int lo = 0;
    int hi = 0; // exclusive
};

Span tile_span(int index, int count, int extent) {
    return {static_cast<int>(static_cast<long long>(index) * extent / count),
            static_cast<int>(static_cast<long long>(index + 1) * extent / count)};
}

void check_tiles(int width, int height, ClaheTiles tiles, double clip) {
    if (tiles.rows < 1 || tiles.cols < 1) throw Error(Errc::InvalidArgument, "CLAHE tiles must be >= (1, 1)");
    if (!(clip >= 1.0)) throw Error(Errc::InvalidArgument, "CLAHE clip must be >= 1");
    if (width < tiles.cols || height < tiles.rows) {
        throw Error(Errc::TinyImage, std::to_string(width) + "x" + std::to_string(height) + " image is smaller than the " +
                                         std::to_string(tiles.rows) + "x" + std::to_string(tiles.cols) + " tile grid");
    }
}

// For each coordinate: the two neighbouring tile centres and the weight of the second.
struct Blend {
    int a = 0;
    int b = 0;
    double w = 0.0;
};

std::vector<Blend> blends(int count, int extent) {
    std::vector<double> centre(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const Span s = tile_span(i, count, extent);
        centre[static_cast<std::size_t>(i)] = (s.lo + s.hi - 1) / 2.0;
    }
    std::vector<Blend> out(static_cast<std::size_t>(extent));
    int j = 0;
    for (int p = 0; p < extent; ++p) {
        while (j + 1 < count && centre[static_cast<std::size_t>(j + 1)] <= p) ++j;
        Blend& b = out[static_cast<std::size_t>(p)];
        if (p <= centre[0]) {
            b = {0, 0, 0.0};
        } else if (j + 1 >= count) {
            b = {count - 1, count - 1, 0.0};
        } else {
            const double c0 = centre[static_cast<std::size_t>(j)];
            const double c1 = centre[static_cast<std::size_t>(j + 1)];
            b = {j, j + 1, (p - c0) / (c1 - c0)};
        }
    }
    return out;
}

} // namespace

std::vector<Lut> tile_luts(std::span<const std::uint8_t> luma, int width, int height, ClaheTiles tiles, double clip) {
    check_tiles(width, height, tiles, clip);
    if (luma.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(Errc::BadDimensions, "luma plane size does not match dimensions");
    }
    std::vector<Lut> luts;
    luts.reserve(static_cast<std::size_t>(tiles.rows * tiles.cols));
    for (int r = 0; r < tiles.rows; ++r) {
        const Span ys = tile_span(r, tiles.rows, height);
        for (int c = 0; c < tiles.cols; ++c) {
            const Span xs = tile_span(c, tiles.cols, width);
            Histogram hist{};
            for (int y = ys.lo; y < ys.hi; ++y) {
                const std::uint8_t* row = &luma[static_cast<std::size_t>(y) * static_cast<std::size_t>(width)];
                for (int x = xs.lo; x < xs.hi; ++x) ++hist[row[x]];
            }
            const auto pixels = static_cast<std::size_t>(ys.hi - ys.lo) * static_cast<std::size_t>(xs.hi - xs.lo);
            clip_histogram(hist, clip_limit(clip, pixels));
            luts.push_back(equalisation_lut(hist));
        }
    }
    return luts;
}

std::vector<std::uint8_t> clahe_plane(std::span<const std::uint8_t> luma, int width, int height, ClaheTiles tiles,
                                      double clip) {
    const auto luts = tile_luts(luma, width, height, tiles, clip);
    const auto bx = blends(tiles.cols, width);
    const auto by = blends(tiles.rows, height);
    std::vector<std::uint8_t> out(luma.size());
    for (int y = 0; y < height; ++y) {
        const Blend& vy = by[static_cast<std::size_t>(y)];
        const Lut* top0 = &luts[static_cast<std::size_t>(vy.a * tiles.cols)];
        const Lut* bot0 = &luts[static_cast<std::size_t>(vy.b * tiles.cols)];
        for (int x = 0; x < width; ++x) {
            const Blend& vx = bx[static_cast<std::size_t>(x)];
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
            const std::uint8_t v = luma[i];
            const double t = top0[vx.a][v] + vx.w * (top0[vx.b][v] - top0[vx.a][v]);
            const double b = bot0[vx.a][v] + vx.w * (bot0[vx.b][v] - bot0[vx.a][v]);
            out[i] = clamp_u8(t + vy.w * (b - t));
        }
    }
    return out;
}

Image clahe(const Image& img, ClaheTiles tiles, double clip) {
    const auto luma = luma_plane(img);
    const auto eq = clahe_plane(luma, img.width(), img.height(), tiles, clip);
    Image out = img;
    auto bytes = out.bytes();
    for (std::size_t i = 0; i < luma.size(); ++i) {
        const int delta = static_cast<int>(eq[i]) - static_cast<int>(luma[i]);
        if (delta == 0) continue;
        for (std::size_t c = 0; c < 3; ++c) {
            bytes[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(static_cast<int>(bytes[i * 3 + c]) + delta, 0, 255));
        }
    }
    return out;
}

} // namespace ecgpaper
