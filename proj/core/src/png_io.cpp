#include "ecgpaper/error.hpp"
#include "ecgpaper/image.hpp"

#include <cstring>

#include <png.h>

namespace ecgpaper {

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.empty()) throw Error(Errc::BadDimensions, "cannot encode an empty image");
    png_image info;
    std::memset(&info, 0, sizeof(info));
    info.version = PNG_IMAGE_VERSION;
    info.width = static_cast<png_uint_32>(img.width());
    info.height = static_cast<png_uint_32>(img.height());
    info.format = PNG_FORMAT_RGB;

    const auto pixels = img.bytes();
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&info, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        const std::string msg = info.message;
        png_image_free(&info);
        throw Error(Errc::IoFailure, "png sizing failed: " + msg);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&info, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        const std::string msg = info.message;
        png_image_free(&info);
        throw Error(Errc::IoFailure, "png encode failed: " + msg);
    }
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image info;
    std::memset(&info, 0, sizeof(info));
    info.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&info, bytes.data(), bytes.size())) {
        const std::string msg = info.message;
        png_image_free(&info);
        throw Error(Errc::IoFailure, "not a readable PNG: " + msg);
    }
    info.format = PNG_FORMAT_RGB;
    Image img(static_cast<int>(info.width), static_cast<int>(info.height));
    auto pixels = img.bytes();
    // Background for any alpha in the source: white paper.
    png_color background{255, 255, 255};
    if (!png_image_finish_read(&info, &background, pixels.data(), 0, nullptr)) {
        const std::string msg = info.message;
        png_image_free(&info);
        throw Error(Errc::IoFailure, "png decode failed: " + msg);
    }
    return img;
}

void write_png(const Image& img, const std::filesystem::path& path) {
    write_file(path, encode_png(img));
}

Image read_png(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_png(bytes);
}

} // namespace ecgpaper
