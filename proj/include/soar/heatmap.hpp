#pragma once

#include <vector>

#include "soar/core_types.hpp"

namespace soar {

// Gaussian width selection. box_scaled ties sigma to the detection:
// sigma = fraction * min(sx, sy), so smaller subjects get tighter peaks.
struct SigmaPolicy {
    enum class Mode { fixed, box_scaled };

    Mode mode = Mode::box_scaled;
    double value = 1.0 / 6.0; // sigma in pixels (fixed) or the scale fraction

    static SigmaPolicy fixed(double sigma_pixels);
    static SigmaPolicy box_scaled(double fraction);

    double sigma_for(const BoundingBox& box) const;
};

// Row-major H x W grid of non-negative scores plus the policy that built it.
struct PixelHeatmap {
    int height = 0;
    int width = 0;
    std::vector<double> values;
    SigmaPolicy sigma;

    double at(int y, int x) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

// Sum of one isotropic Gaussian per box, evaluated at every pixel center.
// With truncate_3sigma, contributions beyond 3 sigma are dropped; each
// omitted term is below exp(-4.5).
PixelHeatmap frame_heatmap(const std::vector<BoundingBox>& boxes,
                           const PatchGeometry& geometry, const SigmaPolicy& sigma,
                           bool truncate_3sigma = false);

// Mean of the per-frame heatmaps over all T frames.
PixelHeatmap video_heatmap(const DetectionSet& detections, const PatchGeometry& geometry,
                           const SigmaPolicy& sigma, bool truncate_3sigma = false);

namespace serial {

PixelHeatmap frame_heatmap(const std::vector<BoundingBox>& boxes,
                           const PatchGeometry& geometry, const SigmaPolicy& sigma,
                           bool truncate_3sigma = false);

PixelHeatmap video_heatmap(const DetectionSet& detections, const PatchGeometry& geometry,
                           const SigmaPolicy& sigma, bool truncate_3sigma = false);

} // namespace serial

} // namespace soar
