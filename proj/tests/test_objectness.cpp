#include <doctest.h>

#include <vector>

#include "soar/objectness.hpp"
#include "soar/rng.hpp"

using namespace soar;

namespace {

PixelHeatmap make_map(int height, int width, std::vector<double> values) {
    PixelHeatmap map;
    map.height = height;
    map.width = width;
    map.values = std::move(values);
    return map;
}

} // namespace

TEST_CASE("zero heatmap aggregates to zero scores") {
    const PatchGeometry g(2, 1, 4, 4, 1, 2, 2);
    const ObjectnessMap map =
        patch_objectness(make_map(4, 4, std::vector<double>(16, 0.0)), g);
    CHECK(map.spatial.size() == 4);
    for (double v : map.spatial) CHECK(v == 0.0);
}

TEST_CASE("uniform heatmap scores c*h*w per cell") {
    const PatchGeometry g(2, 1, 6, 8, 1, 3, 4);
    const double c = 0.37;
    const ObjectnessMap map =
        patch_objectness(make_map(6, 8, std::vector<double>(48, c)), g);
    for (double v : map.spatial) CHECK(v == doctest::Approx(c * 3 * 4).epsilon(1e-15));
}

TEST_CASE("random heatmap matches a pixel-loop oracle") {
    const PatchGeometry g(1, 1, 4, 4, 1, 2, 2);
    rng::SplitMix64 gen(11);
    std::vector<double> values(16);
    for (double& v : values) v = gen.uniform01();
    const PixelHeatmap hm = make_map(4, 4, values);
    const ObjectnessMap map = patch_objectness(hm, g);

    for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < 2; ++col) {
            double expect = 0.0;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    expect += values[static_cast<std::size_t>(row * 2 + dy) * 4 +
                                     (col * 2 + dx)];
                }
            }
            CHECK(map.at(row, col) == doctest::Approx(expect).epsilon(1e-15));
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const PatchGeometry g(1, 1, 4, 4, 1, 2, 2);
    CHECK_THROWS_AS(patch_objectness(make_map(4, 5, std::vector<double>(20, 0.0)), g),
                    ShapeError);
}

TEST_CASE("token scores replicate spatial scores across slots") {
    const PatchGeometry g(2, 1, 4, 4, 1, 2, 2);
    ObjectnessMap map;
    map.geometry = g;
    map.spatial = {1.0, 2.0, 3.0, 4.0};
    const TokenScores ts = token_scores(map);
    CHECK(ts.scores == std::vector<double>{1, 2, 3, 4, 1, 2, 3, 4});
    CHECK(ts.mu == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("token scores of a zero map are zero with zero mean") {
    const PatchGeometry g(2, 1, 4, 4, 1, 2, 2);
    ObjectnessMap map;
    map.geometry = g;
    map.spatial.assign(4, 0.0);
    const TokenScores ts = token_scores(map);
    for (double s : ts.scores) CHECK(s == 0.0);
    CHECK(ts.mu == 0.0);
}

TEST_CASE("single slot replication is the identity") {
    const PatchGeometry g(1, 1, 4, 4, 1, 2, 2);
    ObjectnessMap map;
    map.geometry = g;
    map.spatial = {5.0, 6.0, 7.0, 8.0};
    const TokenScores ts = token_scores(map);
    CHECK(ts.scores == map.spatial);
}

TEST_CASE("total token score conserves heatmap mass times slots") {
    const PatchGeometry g(4, 1, 8, 8, 2, 2, 4);
    rng::SplitMix64 gen(5);
    std::vector<double> values(64);
    double mass = 0.0;
    for (double& v : values) {
        v = gen.uniform01();
        mass += v;
    }
    const ObjectnessMap map = patch_objectness(make_map(8, 8, values), g);
    const TokenScores ts = token_scores(map);
    double total = 0.0;
    for (double s : ts.scores) total += s;
    CHECK(total == doctest::Approx(mass * g.temporal_slots()).epsilon(1e-12));
}

TEST_CASE("adding a detection never lowers a cell score") {
    const PatchGeometry g(1, 1, 16, 16, 1, 4, 4);
    const SigmaPolicy sigma = SigmaPolicy::fixed(2.0);
    std::vector<BoundingBox> boxes{BoundingBox(4, 4, 3, 3)};
    const ObjectnessMap before = patch_objectness(frame_heatmap(boxes, g, sigma), g);
    boxes.emplace_back(11, 9, 5, 5);
    const ObjectnessMap after = patch_objectness(frame_heatmap(boxes, g, sigma), g);
    for (std::size_t i = 0; i < before.spatial.size(); ++i) {
        CHECK(after.spatial[i] >= before.spatial[i]);
    }
}
