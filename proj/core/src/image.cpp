#include "ecgpaper/image.hpp"

#include "ecgpaper/error.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

namespace ecgpaper {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(Errc::BadDimensions, "negative image size");
    data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

Image Image::crop(int x, int y, int w, int h) const {
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > width_ || y + h > height_) {
        throw Error(Errc::BadDimensions, "crop rectangle outside image");
    }
    Image out(w, h);
    for (int row = 0; row < h; ++row) {
        const auto src = data_.begin() + static_cast<std::ptrdiff_t>(offset(x, y + row));
        std::copy(src, src + w * 3, out.data_.begin() + static_cast<std::ptrdiff_t>(out.offset(0, row)));
    }
    return out;
}

std::vector<std::uint8_t> luma_plane(const Image& img) {
    std::vector<std::uint8_t> plane(static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.height()));
    const auto bytes = img.bytes();
    for (std::size_t i = 0; i < plane.size(); ++i) {
        plane[i] = static_cast<std::uint8_t>(luma601({bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]}));
    }
    return plane;
}

double psnr(const Image& a, const Image& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(Errc::BadDimensions, "psnr of differently sized images");
    }
    const auto pa = a.bytes();
    const auto pb = b.bytes();
    double sse = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(pa.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

} // namespace ecgpaper
