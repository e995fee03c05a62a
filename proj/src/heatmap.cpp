#include "soar/heatmap.hpp"

#include <cmath>

#include "soar/parallel.hpp"

namespace soar {

SigmaPolicy SigmaPolicy::fixed(double sigma_pixels) {
    if (!(sigma_pixels > 0.0)) throw ParameterError("fixed sigma must be positive");
    return SigmaPolicy{Mode::fixed, sigma_pixels};
}

SigmaPolicy SigmaPolicy::box_scaled(double fraction) {
    if (!(fraction > 0.0)) throw ParameterError("sigma scale fraction must be positive");
    return SigmaPolicy{Mode::box_scaled, fraction};
}

double SigmaPolicy::sigma_for(const BoundingBox& box) const {
    if (!(value > 0.0)) throw ParameterError("sigma policy value must be positive");
    if (mode == Mode::fixed) return value;
    return value * (box.sx < box.sy ? box.sx : box.sy);
}

namespace {

struct Kernel {
    double cx, cy;
    double inv_two_sigma_sq;
    double r2_cutoff; // negative = no cutoff
};

std::vector<Kernel> build_kernels(const std::vector<BoundingBox>& boxes,
                                  const SigmaPolicy& sigma, bool truncate) {
    std::vector<Kernel> kernels;
    kernels.reserve(boxes.size());
    for (const BoundingBox& b : boxes) {
        const double s = sigma.sigma_for(b);
        Kernel k;
        k.cx = b.cx;
        k.cy = b.cy;
        k.inv_two_sigma_sq = 1.0 / (2.0 * s * s);
        k.r2_cutoff = truncate ? 9.0 * s * s : -1.0;
        kernels.push_back(k);
    }
    return kernels;
}

// One pixel's score: sum over kernels in box order.
inline double pixel_score(const std::vector<Kernel>& kernels, double x, double y) {
    double acc = 0.0;
    for (const Kernel& k : kernels) {
        const double dx = x - k.cx;
        const double dy = y - k.cy;
        const double r2 = dx * dx + dy * dy;
        if (k.r2_cutoff >= 0.0 && r2 > k.r2_cutoff) continue;
        acc += std::exp(-r2 * k.inv_two_sigma_sq);
    }
    return acc;
}

} // namespace

namespace serial {

PixelHeatmap frame_heatmap(const std::vector<BoundingBox>& boxes,
                           const PatchGeometry& geometry, const SigmaPolicy& sigma,
                           bool truncate_3sigma) {
    const auto kernels = build_kernels(boxes, sigma, truncate_3sigma);
    PixelHeatmap map;
    map.height = geometry.height;
    map.width = geometry.width;
    map.sigma = sigma;
    map.values.assign(static_cast<std::size_t>(map.height) * map.width, 0.0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            map.values[static_cast<std::size_t>(y) * map.width + x] =
                pixel_score(kernels, static_cast<double>(x), static_cast<double>(y));
        }
    }
    return map;
}

PixelHeatmap video_heatmap(const DetectionSet& detections, const PatchGeometry& geometry,
                           const SigmaPolicy& sigma, bool truncate_3sigma) {
    if (detections.frames() != geometry.frames) {
        throw ShapeError("detection frame count does not match geometry");
    }
    std::vector<std::vector<Kernel>> per_frame;
    per_frame.reserve(static_cast<std::size_t>(geometry.frames));
    for (int t = 0; t < geometry.frames; ++t) {
        per_frame.push_back(build_kernels(detections.frame(t), sigma, truncate_3sigma));
    }
    const double inv_t = 1.0 / static_cast<double>(geometry.frames);

    PixelHeatmap map;
    map.height = geometry.height;
    map.width = geometry.width;
    map.sigma = sigma;
    map.values.assign(static_cast<std::size_t>(map.height) * map.width, 0.0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double acc = 0.0;
            for (const auto& kernels : per_frame) {
                acc += pixel_score(kernels, static_cast<double>(x), static_cast<double>(y));
            }
            map.values[static_cast<std::size_t>(y) * map.width + x] = acc * inv_t;
        }
    }
    return map;
}

} // namespace serial

// Parallel variants split the pixel grid by row. Each pixel accumulates
// in the same frame/box order as the serial code, so results are
// bit-identical for any thread count.

PixelHeatmap frame_heatmap(const std::vector<BoundingBox>& boxes,
                           const PatchGeometry& geometry, const SigmaPolicy& sigma,
                           bool truncate_3sigma) {
    const auto kernels = build_kernels(boxes, sigma, truncate_3sigma);
    PixelHeatmap map;
    map.height = geometry.height;
    map.width = geometry.width;
    map.sigma = sigma;
    map.values.assign(static_cast<std::size_t>(map.height) * map.width, 0.0);

    const int h = map.height;
    const int w = map.width;
    double* out = map.values.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] =
                pixel_score(kernels, static_cast<double>(x), static_cast<double>(y));
        }
    }
    return map;
}

PixelHeatmap video_heatmap(const DetectionSet& detections, const PatchGeometry& geometry,
                           const SigmaPolicy& sigma, bool truncate_3sigma) {
    if (detections.frames() != geometry.frames) {
        throw ShapeError("detection frame count does not match geometry");
    }
    std::vector<std::vector<Kernel>> per_frame;
    per_frame.reserve(static_cast<std::size_t>(geometry.frames));
    for (int t = 0; t < geometry.frames; ++t) {
        per_frame.push_back(build_kernels(detections.frame(t), sigma, truncate_3sigma));
    }
    const double inv_t = 1.0 / static_cast<double>(geometry.frames);

    PixelHeatmap map;
    map.height = geometry.height;
    map.width = geometry.width;
    map.sigma = sigma;
    map.values.assign(static_cast<std::size_t>(map.height) * map.width, 0.0);

    const int h = map.height;
    const int w = map.width;
    double* out = map.values.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (const auto& kernels : per_frame) {
                acc += pixel_score(kernels, static_cast<double>(x), static_cast<double>(y));
            }
            out[static_cast<std::size_t>(y) * w + x] = acc * inv_t;
        }
    }
    return map;
}

} // namespace soar
