#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library code it checks.

#include "ecgpaper/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

/// (2 * wins + ties) / (2 * P * N) over every positive/negative pair.
double pairwise_auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Global histogram equalisation by sorting: level v maps to
/// round(255 * (#{x < v} + #{x == v} / 2) / N).
std::vector<std::uint8_t> global_equalise(std::span<const std::uint8_t> plane);

/// Homography with h22 = 1 from the 8x8 linear system of four
/// correspondences, solved by partial-pivot LU.
std::array<double, 9> homography_lu(const ecgpaper::Quad& src, const ecgpaper::Quad& dst);

/// Catmull-Rom through the cubic Hermite basis with tangents (p2 - p0) / 2
/// and (p3 - p1) / 2.
ecgpaper::Point hermite_catmull_rom(ecgpaper::Point p0, ecgpaper::Point p1, ecgpaper::Point p2, ecgpaper::Point p3,
                                     double t);

/// Largest |a - b| over entries after scaling both to h22 = 1.
double max_entry_error(const std::array<double, 9>& a, const std::array<double, 9>& b);

} // namespace oracle
