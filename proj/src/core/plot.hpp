#pragma once

#include <filesystem>
#include <vector>

#include "core/beta_search.hpp"

namespace kswap {

// Line plot of score against beta, one colour per curve, on a fixed [0,1]
// score axis. Output bytes depend only on the curves.
void render_curves_png(const std::vector<BetaCurve>& curves, const std::filesystem::path& path,
                       int width = 640, int height = 400);

}  // namespace kswap
