#pragma once

#include <vector>

#include "soar/core_types.hpp"
#include "soar/heatmap.hpp"

namespace soar {

// Patch-level objectness: one score per spatial cell, the exact sum of
// the pixel heatmap over that cell. Row-major (H/h) x (W/w).
struct ObjectnessMap {
    PatchGeometry geometry;
    std::vector<double> spatial;

    double at(int row, int col) const {
        return spatial[static_cast<std::size_t>(row) * geometry.patch_cols() + col];
    }
};

// Spatial scores broadcast over temporal slots, one score per token,
// with the mean over all N tokens.
struct TokenScores {
    PatchGeometry geometry;
    std::vector<double> scores;
    double mu = 0.0;
};

ObjectnessMap patch_objectness(const PixelHeatmap& heatmap, const PatchGeometry& geometry);

TokenScores token_scores(const ObjectnessMap& map);

namespace serial {
ObjectnessMap patch_objectness(const PixelHeatmap& heatmap, const PatchGeometry& geometry);
}

} // namespace soar
