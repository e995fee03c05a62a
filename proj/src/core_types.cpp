#include "soar/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace soar {

PatchGeometry::PatchGeometry(int frames_, int channels_, int height_, int width_,
                             int patch_t_, int patch_h_, int patch_w_)
    : frames(frames_),
      channels(channels_),
      height(height_),
      width(width_),
      patch_t(patch_t_),
      patch_h(patch_h_),
      patch_w(patch_w_) {
    if (frames <= 0 || channels <= 0 || height <= 0 || width <= 0 ||
        patch_t <= 0 || patch_h <= 0 || patch_w <= 0) {
        throw ParameterError("patch geometry dimensions must be positive");
    }
    if (frames % patch_t != 0 || height % patch_h != 0 || width % patch_w != 0) {
        throw ParameterError("patch sizes must divide the video dimensions exactly");
    }
}

int token_index(int slot, int row, int col, const PatchGeometry& g) {
    if (slot < 0 || slot >= g.temporal_slots() || row < 0 || row >= g.patch_rows() ||
        col < 0 || col >= g.patch_cols()) {
        throw RangeError("token coordinates out of range");
    }
    return slot * g.spatial_count() + row * g.patch_cols() + col;
}

TokenCoords token_coords(int token, const PatchGeometry& g) {
    if (token < 0 || token >= g.token_count()) {
        throw RangeError("token index out of range");
    }
    TokenCoords c;
    c.slot = token / g.spatial_count();
    const int spatial = token % g.spatial_count();
    c.row = spatial / g.patch_cols();
    c.col = spatial % g.patch_cols();
    return c;
}

VideoTensor::VideoTensor(PatchGeometry geometry_, std::vector<double> values)
    : geometry(geometry_), data(std::move(values)) {
    if (data.size() != geometry.value_count()) {
        throw ShapeError("video data length does not match geometry (expected " +
                         std::to_string(geometry.value_count()) + ", got " +
                         std::to_string(data.size()) + ")");
    }
    for (double v : data) {
        if (!std::isfinite(v)) throw ValueError("video data contains non-finite values");
    }
}

std::vector<double> extract_patch(const VideoTensor& video, int token) {
    const PatchGeometry& g = video.geometry;
    if (token < 0 || token >= g.token_count()) {
        throw RangeError("token index out of range");
    }
    const TokenCoords tc = token_coords(token, g);
    const int f0 = tc.slot * g.patch_t;
    const int y0 = tc.row * g.patch_h;
    const int x0 = tc.col * g.patch_w;

    std::vector<double> patch;
    patch.reserve(static_cast<std::size_t>(g.patch_elems()));
    for (int df = 0; df < g.patch_t; ++df) {
        for (int c = 0; c < g.channels; ++c) {
            for (int dy = 0; dy < g.patch_h; ++dy) {
                for (int dx = 0; dx < g.patch_w; ++dx) {
                    patch.push_back(video.at(f0 + df, c, y0 + dy, x0 + dx));
                }
            }
        }
    }
    return patch;
}

BoundingBox::BoundingBox(double cx_, double cy_, double sx_, double sy_)
    : cx(cx_), cy(cy_), sx(sx_), sy(sy_) {
    if (!(sx > 0.0) || !(sy > 0.0)) {
        throw ParameterError("bounding box size must be positive");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(sx) || !std::isfinite(sy)) {
        throw ValueError("bounding box fields must be finite");
    }
}

DetectionSet::DetectionSet(int frames) {
    if (frames <= 0) throw ParameterError("detection set needs at least one frame");
    per_frame_.resize(static_cast<std::size_t>(frames));
}

void DetectionSet::add(int frame, const BoundingBox& box) {
    if (frame < 0 || frame >= frames()) {
        throw RangeError("detection frame index out of range");
    }
    per_frame_[static_cast<std::size_t>(frame)].push_back(box);
}

const std::vector<BoundingBox>& DetectionSet::frame(int t) const {
    if (t < 0 || t >= frames()) {
        throw RangeError("detection frame index out of range");
    }
    return per_frame_[static_cast<std::size_t>(t)];
}

std::size_t DetectionSet::total_boxes() const {
    std::size_t n = 0;
    for (const auto& f : per_frame_) n += f.size();
    return n;
}

MaskSpec::MaskSpec(PatchGeometry geometry_, std::vector<std::uint8_t> visible_)
    : geometry(geometry_), visible(std::move(visible_)) {
    if (visible.size() != static_cast<std::size_t>(geometry.token_count())) {
        throw ShapeError("mask length does not match token count");
    }
    visible_count = static_cast<int>(std::count_if(
        visible.begin(), visible.end(), [](std::uint8_t v) { return v != 0; }));
}

std::vector<int> MaskSpec::visible_indices() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(visible_count));
    for (int i = 0; i < static_cast<int>(visible.size()); ++i) {
        if (visible[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

std::vector<int> MaskSpec::invisible_indices() const {
    std::vector<int> out;
    out.reserve(visible.size() - static_cast<std::size_t>(visible_count));
    for (int i = 0; i < static_cast<int>(visible.size()); ++i) {
        if (!visible[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

} // namespace soar
