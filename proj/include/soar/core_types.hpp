#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "soar/error.hpp"

namespace soar {

// Dense video dimensions plus the patch tiling applied to them. Patch
// sizes must divide the corresponding video dimensions exactly.
struct PatchGeometry {
    int frames = 0;   // T
    int channels = 0; // C
    int height = 0;   // pixels
    int width = 0;    // pixels
    int patch_t = 0;  // frames per patch
    int patch_h = 0;  // pixels
    int patch_w = 0;  // pixels

    PatchGeometry() = default;
    PatchGeometry(int frames, int channels, int height, int width,
                  int patch_t, int patch_h, int patch_w);

    int temporal_slots() const { return frames / patch_t; }
    int patch_rows() const { return height / patch_h; }
    int patch_cols() const { return width / patch_w; }
    int spatial_count() const { return patch_rows() * patch_cols(); }
    int token_count() const { return temporal_slots() * spatial_count(); }
    int patch_elems() const { return patch_t * channels * patch_h * patch_w; }
    std::size_t value_count() const {
        return static_cast<std::size_t>(frames) * channels * height * width;
    }

    bool operator==(const PatchGeometry&) const = default;
};

// Token order is temporal-slot-major, then row-major over the spatial
// grid: token = slot * spatial_count + row * patch_cols + col.
int token_index(int slot, int row, int col, const PatchGeometry& g);

struct TokenCoords {
    int slot = 0;
    int row = 0;
    int col = 0;
    bool operator==(const TokenCoords&) const = default;
};

TokenCoords token_coords(int token, const PatchGeometry& g);

// Dense T x C x H x W grid of finite doubles, frame-major then channel,
// row-major within each frame.
struct VideoTensor {
    PatchGeometry geometry;
    std::vector<double> data;

    VideoTensor(PatchGeometry geometry, std::vector<double> values);

    double at(int frame, int channel, int y, int x) const {
        return data[offset(frame, channel, y, x)];
    }

    std::size_t offset(int frame, int channel, int y, int x) const {
        return ((static_cast<std::size_t>(frame) * geometry.channels + channel) *
                    geometry.height +
                y) *
                   geometry.width +
               x;
    }
};

// Copies one token's t x C x h x w block, nested in the same order as the
// tensor layout (frame, channel, row, column).
std::vector<double> extract_patch(const VideoTensor& video, int token);

// Detection box in continuous pixel coordinates, origin at the top-left
// pixel center. Centers may lie outside the frame.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double sx = 0.0; // width, > 0
    double sy = 0.0; // height, > 0

    BoundingBox() = default;
    BoundingBox(double cx, double cy, double sx, double sy);
};

// Per-frame box lists; frames without detections stay as empty lists.
class DetectionSet {
public:
    explicit DetectionSet(int frames);

    void add(int frame, const BoundingBox& box);

    int frames() const { return static_cast<int>(per_frame_.size()); }
    const std::vector<BoundingBox>& frame(int t) const;
    std::size_t total_boxes() const;

private:
    std::vector<std::vector<BoundingBox>> per_frame_;
};

// Per-token visibility over the flattened token order. 1 = visible.
struct MaskSpec {
    PatchGeometry geometry;
    std::vector<std::uint8_t> visible;
    int visible_count = 0;

    MaskSpec(PatchGeometry geometry, std::vector<std::uint8_t> visible);

    bool is_visible(int token) const { return visible[static_cast<std::size_t>(token)] != 0; }
    std::vector<int> visible_indices() const;
    std::vector<int> invisible_indices() const;
};

} // namespace soar
