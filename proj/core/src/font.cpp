#include "ecgpaper/render.hpp"

#include <array>
#include <utility>

namespace ecgpaper {

namespace {

using Glyph = std::array<const char*, 7>;

// 5x7 cells; only the characters that appear in lead names.
const std::pair<char, Glyph> kGlyphs[] = {
    {'I', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"}},
    {'V', {"#...#", "#...#", "#...#", "#...#", ".#.#.", ".#.#.", "..#.."}},
    {'a', {".....", ".....", ".###.", "....#", ".####", "#...#", ".####"}},
    {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {'1', {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
    {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {'3', {"####.", "....#", "....#", ".###.", "....#", "....#", "####."}},
    {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {'6', {".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."}},
};

const Glyph* find_glyph(char c) {
    for (const auto& [ch, glyph] : kGlyphs) {
        if (ch == c) return &glyph;
    }
    return nullptr;
}

} // namespace

void draw_text(Image& img, int x, int y, std::string_view text, int scale, Rgb colour) {
    int pen = x;
    for (char c : text) {
        if (const Glyph* g = find_glyph(c)) {
            for (int row = 0; row < 7; ++row) {
                for (int col = 0; col < 5; ++col) {
                    if ((*g)[static_cast<std::size_t>(row)][col] != '#') continue;
                    for (int dy = 0; dy < scale; ++dy) {
                        for (int dx = 0; dx < scale; ++dx) {
                            const int px = pen + col * scale + dx;
                            const int py = y + row * scale + dy;
                            if (img.contains(px, py)) img.set(px, py, colour);
                        }
                    }
                }
            }
        }
        pen += 6 * scale;
    }
}

} // namespace ecgpaper
