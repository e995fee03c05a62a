#include "soar/objectness.hpp"

#include "soar/parallel.hpp"

namespace soar {

namespace {

// Exact sum over one cell's h x w pixel block, row-major order.
double cell_sum(const PixelHeatmap& hm, const PatchGeometry& g, int row, int col) {
    const int y0 = row * g.patch_h;
    const int x0 = col * g.patch_w;
    double acc = 0.0;
    for (int dy = 0; dy < g.patch_h; ++dy) {
        const double* line = hm.values.data() + static_cast<std::size_t>(y0 + dy) * hm.width;
        for (int dx = 0; dx < g.patch_w; ++dx) {
            acc += line[x0 + dx];
        }
    }
    return acc;
}

void check_dims(const PixelHeatmap& heatmap, const PatchGeometry& geometry) {
    if (heatmap.height != geometry.height || heatmap.width != geometry.width) {
        throw ShapeError("heatmap dimensions do not match geometry");
    }
}

} // namespace

namespace serial {

ObjectnessMap patch_objectness(const PixelHeatmap& heatmap, const PatchGeometry& geometry) {
    check_dims(heatmap, geometry);
    ObjectnessMap map;
    map.geometry = geometry;
    map.spatial.assign(static_cast<std::size_t>(geometry.spatial_count()), 0.0);
    for (int row = 0; row < geometry.patch_rows(); ++row) {
        for (int col = 0; col < geometry.patch_cols(); ++col) {
            map.spatial[static_cast<std::size_t>(row) * geometry.patch_cols() + col] =
                cell_sum(heatmap, geometry, row, col);
        }
    }
    return map;
}

} // namespace serial

ObjectnessMap patch_objectness(const PixelHeatmap& heatmap, const PatchGeometry& geometry) {
    check_dims(heatmap, geometry);
    ObjectnessMap map;
    map.geometry = geometry;
    map.spatial.assign(static_cast<std::size_t>(geometry.spatial_count()), 0.0);

    const int cells = geometry.spatial_count();
    const int cols = geometry.patch_cols();
    double* out = map.spatial.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int cell = 0; cell < cells; ++cell) {
        out[cell] = cell_sum(heatmap, geometry, cell / cols, cell % cols);
    }
    return map;
}

TokenScores token_scores(const ObjectnessMap& map) {
    const PatchGeometry& g = map.geometry;
    TokenScores ts;
    ts.geometry = g;
    ts.scores.reserve(static_cast<std::size_t>(g.token_count()));
    for (int slot = 0; slot < g.temporal_slots(); ++slot) {
        ts.scores.insert(ts.scores.end(), map.spatial.begin(), map.spatial.end());
    }
    double sum = 0.0;
    for (double s : ts.scores) sum += s;
    ts.mu = sum / static_cast<double>(ts.scores.size());
    return ts;
}

} // namespace soar
