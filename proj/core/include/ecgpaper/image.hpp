#pragma once

#include "ecgpaper/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ecgpaper {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// ITU-R BT.601 luma, rounded to the nearest integer level.
inline int luma601(Rgb c) {
    return (299 * c.r + 587 * c.g + 114 * c.b + 500) / 1000;
}

inline std::uint8_t clamp_u8(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 255.0) return 255;
    return static_cast<std::uint8_t>(v + 0.5);
}

/// Interleaved 8-bit RGB raster, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {});

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Rgb at(int x, int y) const {
        const std::uint8_t* p = &data_[offset(x, y)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        std::uint8_t* p = &data_[offset(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    std::span<std::uint8_t> bytes() { return data_; }
    std::span<const std::uint8_t> bytes() const { return data_; }

    /// Copy of the rectangle [x, x+w) x [y, y+h); must lie inside the image.
    Image crop(int x, int y, int w, int h) const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// A raster with its physical scale and the ground-truth paper corners.
struct PaperImage {
    Image raster;
    double px_per_mm = 0.0;
    Quad corners;

    int width() const { return raster.width(); }
    int height() const { return raster.height(); }
};

/// Luma plane of an image (one byte per pixel).
std::vector<std::uint8_t> luma_plane(const Image& img);

/// Peak signal-to-noise ratio over all channels; +inf for identical images.
double psnr(const Image& a, const Image& b);

// PNG, 8-bit RGB without alpha. Encoding is deterministic for a given raster.
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const Image& img, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace ecgpaper
