#include <doctest.h>

#include <limits>
#include <numeric>
#include <vector>

#include "soar/core_types.hpp"

using namespace soar;

namespace {

PatchGeometry grid_14x14() {
    // 224x224 frame, 16x16 spatial patches, 16 frames in pairs.
    return PatchGeometry(16, 3, 224, 224, 2, 16, 16);
}

} // namespace

TEST_CASE("geometry validates divisibility") {
    CHECK_THROWS_AS(PatchGeometry(16, 3, 224, 224, 3, 16, 16), ParameterError);
    CHECK_THROWS_AS(PatchGeometry(16, 3, 225, 224, 2, 16, 16), ParameterError);
    CHECK_THROWS_AS(PatchGeometry(16, 3, 224, 230, 2, 16, 16), ParameterError);
    CHECK_THROWS_AS(PatchGeometry(0, 3, 224, 224, 2, 16, 16), ParameterError);

    const PatchGeometry g = grid_14x14();
    CHECK(g.temporal_slots() == 8);
    CHECK(g.spatial_count() == 196);
    CHECK(g.token_count() == 8 * 196);
    CHECK(g.patch_elems() == 2 * 3 * 16 * 16);
}

TEST_CASE("token index arithmetic") {
    const PatchGeometry g = grid_14x14();
    CHECK(token_index(0, 0, 0, g) == 0);
    CHECK(token_index(1, 0, 0, g) == 196);
    CHECK(token_index(2, 3, 5, g) == 2 * 196 + 3 * 14 + 5);
    CHECK(token_index(2, 3, 5, g) == 439);

    CHECK_THROWS_AS(token_index(8, 0, 0, g), RangeError);
    CHECK_THROWS_AS(token_index(0, 14, 0, g), RangeError);
    CHECK_THROWS_AS(token_index(0, 0, 14, g), RangeError);
    CHECK_THROWS_AS(token_index(-1, 0, 0, g), RangeError);
}

TEST_CASE("token index round-trips through coordinates") {
    const PatchGeometry g(4, 1, 12, 8, 2, 4, 2);
    for (int token = 0; token < g.token_count(); ++token) {
        const TokenCoords c = token_coords(token, g);
        CHECK(token_index(c.slot, c.row, c.col, g) == token);
    }
    CHECK_THROWS_AS(token_coords(g.token_count(), g), RangeError);
}

TEST_CASE("constant video extracts constant patches") {
    const PatchGeometry g(2, 1, 4, 4, 1, 2, 2);
    const VideoTensor video(g, std::vector<double>(g.value_count(), 3.5));
    for (int token = 0; token < g.token_count(); ++token) {
        for (double v : extract_patch(video, token)) CHECK(v == 3.5);
    }
}

TEST_CASE("patch extraction matches an index-walking oracle") {
    const PatchGeometry g(4, 2, 6, 8, 2, 3, 4);
    std::vector<double> data(g.value_count());
    std::iota(data.begin(), data.end(), 0.0);
    const VideoTensor video(g, data);

    // token 0 covers frames 0..1, rows 0..2, cols 0..3, both channels.
    const std::vector<double> patch = extract_patch(video, 0);
    std::vector<double> expect;
    for (int f = 0; f < 2; ++f) {
        for (int c = 0; c < 2; ++c) {
            for (int y = 0; y < 3; ++y) {
                for (int x = 0; x < 4; ++x) {
                    expect.push_back(
                        data[((static_cast<std::size_t>(f) * 2 + c) * 6 + y) * 8 + x]);
                }
            }
        }
    }
    CHECK(patch == expect);
    CHECK_THROWS_AS(extract_patch(video, g.token_count()), RangeError);
}

TEST_CASE("one-pixel patches are singletons in row-major order") {
    const PatchGeometry g(1, 1, 2, 2, 1, 1, 1);
    const VideoTensor video(g, std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(extract_patch(video, 0) == std::vector<double>{1.0});
    CHECK(extract_patch(video, 1) == std::vector<double>{2.0});
    CHECK(extract_patch(video, 2) == std::vector<double>{3.0});
    CHECK(extract_patch(video, 3) == std::vector<double>{4.0});
}

TEST_CASE("patches reassemble to the original tensor") {
    const PatchGeometry g(4, 2, 6, 8, 2, 2, 4);
    std::vector<double> data(g.value_count());
    std::iota(data.begin(), data.end(), -37.0);
    const VideoTensor video(g, data);

    std::vector<double> rebuilt(g.value_count(), 0.0);
    for (int token = 0; token < g.token_count(); ++token) {
        const TokenCoords c = token_coords(token, g);
        const std::vector<double> patch = extract_patch(video, token);
        std::size_t i = 0;
        for (int df = 0; df < g.patch_t; ++df) {
            for (int ch = 0; ch < g.channels; ++ch) {
                for (int dy = 0; dy < g.patch_h; ++dy) {
                    for (int dx = 0; dx < g.patch_w; ++dx) {
                        rebuilt[video.offset(c.slot * g.patch_t + df, ch,
                                             c.row * g.patch_h + dy,
                                             c.col * g.patch_w + dx)] = patch[i++];
                    }
                }
            }
        }
    }
    CHECK(rebuilt == data);
}

TEST_CASE("video tensor rejects bad payloads") {
    const PatchGeometry g(1, 1, 2, 2, 1, 1, 1);
    CHECK_THROWS_AS(VideoTensor(g, std::vector<double>(3, 0.0)), ShapeError);
    std::vector<double> bad(4, 0.0);
    bad[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(VideoTensor(g, bad), ValueError);
}

TEST_CASE("bounding boxes require positive sizes") {
    CHECK_THROWS_AS(BoundingBox(0, 0, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(BoundingBox(0, 0, 1.0, -2.0), ParameterError);
    const BoundingBox ok(-5.0, 300.0, 2.5, 1.0); // centers may fall outside the frame
    CHECK(ok.cx == -5.0);
}

TEST_CASE("detection sets keep empty frames") {
    DetectionSet dets(4);
    dets.add(2, BoundingBox(1, 1, 2, 2));
    CHECK(dets.frames() == 4);
    CHECK(dets.frame(0).empty());
    CHECK(dets.frame(2).size() == 1);
    CHECK(dets.total_boxes() == 1);
    CHECK_THROWS_AS(dets.add(4, BoundingBox(1, 1, 2, 2)), RangeError);
}

TEST_CASE("mask spec partitions tokens") {
    const PatchGeometry g(2, 1, 2, 2, 1, 1, 1);
    std::vector<std::uint8_t> vis(static_cast<std::size_t>(g.token_count()), 0);
    vis[1] = 1;
    vis[6] = 1;
    const MaskSpec mask(g, vis);
    CHECK(mask.visible_count == 2);
    CHECK(mask.visible_indices() == std::vector<int>{1, 6});

    const auto inv = mask.invisible_indices();
    CHECK(static_cast<int>(inv.size()) + mask.visible_count == g.token_count());
    for (int i : inv) CHECK(!mask.is_visible(i));

    CHECK_THROWS_AS(MaskSpec(g, std::vector<std::uint8_t>(3, 0)), ShapeError);
}
