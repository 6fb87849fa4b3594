#pragma once

#include "ecgpaper/image.hpp"
#include "ecgpaper/rng.hpp"
#include "ecgpaper/waveform.hpp"

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ecgpaper-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline ecgpaper::Image noise_image(int w, int h, std::uint64_t seed) {
    ecgpaper::Image img(w, h);
    ecgpaper::Rng rng(seed);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

inline bool same_file(const std::filesystem::path& a, const std::filesystem::path& b) {
    return ecgpaper::read_file(a) == ecgpaper::read_file(b);
}

} // namespace fixture
