#include <doctest.h>

#include <cmath>
#include <vector>

#include "soar/heatmap.hpp"
#include "soar/rng.hpp"

using namespace soar;

namespace {

PatchGeometry small_frame() { return PatchGeometry(4, 1, 32, 32, 1, 4, 4); }

// Straight-line recomputation of one pixel from the definition.
double oracle_pixel(const std::vector<BoundingBox>& boxes, const SigmaPolicy& sigma,
                    double x, double y) {
    double acc = 0.0;
    for (const BoundingBox& b : boxes) {
        const double s = sigma.sigma_for(b);
        const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
        acc += std::exp(-d2 / (2.0 * s * s));
    }
    return acc;
}

} // namespace

TEST_CASE("sigma policy") {
    const SigmaPolicy fixed = SigmaPolicy::fixed(3.0);
    CHECK(fixed.sigma_for(BoundingBox(0, 0, 10, 20)) == 3.0);

    const SigmaPolicy scaled = SigmaPolicy::box_scaled(1.0 / 6.0);
    CHECK(scaled.sigma_for(BoundingBox(0, 0, 12, 18)) == doctest::Approx(2.0));
    CHECK(scaled.sigma_for(BoundingBox(0, 0, 18, 12)) == doctest::Approx(2.0));

    CHECK_THROWS_AS(SigmaPolicy::fixed(0.0), ParameterError);
    CHECK_THROWS_AS(SigmaPolicy::fixed(-1.0), ParameterError);
    CHECK_THROWS_AS(SigmaPolicy::box_scaled(-0.5), ParameterError);
}

TEST_CASE("no boxes give an all-zero heatmap") {
    const PixelHeatmap map =
        frame_heatmap({}, small_frame(), SigmaPolicy::box_scaled(1.0 / 6.0));
    for (double v : map.values) CHECK(v == 0.0);
}

TEST_CASE("one integer-centered box peaks at exactly one") {
    const std::vector<BoundingBox> boxes{BoundingBox(10, 12, 6, 6)};
    const PixelHeatmap map = frame_heatmap(boxes, small_frame(), SigmaPolicy::fixed(2.0));
    CHECK(map.at(12, 10) == 1.0);
    // Every other pixel is strictly below the peak.
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (x == 10 && y == 12) continue;
            CHECK(map.at(y, x) < 1.0);
        }
    }
}

TEST_CASE("two coincident boxes double the peak and match scalar recomputation") {
    const std::vector<BoundingBox> boxes{BoundingBox(16, 16, 12, 12),
                                         BoundingBox(16, 16, 12, 12)};
    const SigmaPolicy sigma = SigmaPolicy::fixed(4.0);
    const PixelHeatmap map = frame_heatmap(boxes, small_frame(), sigma);
    CHECK(map.at(16, 16) == doctest::Approx(2.0).epsilon(1e-15));
    // Distance sigma from the center along x.
    CHECK(map.at(16, 20) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
    // Spot-check a scattering of pixels against the definition.
    for (int y = 0; y < 32; y += 5) {
        for (int x = 0; x < 32; x += 7) {
            CHECK(map.at(y, x) ==
                  doctest::Approx(oracle_pixel(boxes, sigma, x, y)).epsilon(1e-14));
        }
    }
}

TEST_CASE("video heatmap averages over frames") {
    const PatchGeometry g = small_frame();
    const SigmaPolicy sigma = SigmaPolicy::fixed(2.5);

    SUBCASE("box only in frame zero scales by 1/T") {
        DetectionSet dets(g.frames);
        dets.add(0, BoundingBox(8, 8, 5, 5));
        const PixelHeatmap video = video_heatmap(dets, g, sigma);
        const PixelHeatmap frame = frame_heatmap(dets.frame(0), g, sigma);
        for (std::size_t i = 0; i < video.values.size(); ++i) {
            CHECK(video.values[i] == doctest::Approx(frame.values[i] / 4.0).epsilon(1e-15));
        }
    }

    SUBCASE("identical detections in every frame equal a single frame") {
        DetectionSet dets(g.frames);
        for (int t = 0; t < g.frames; ++t) dets.add(t, BoundingBox(20, 9, 4, 4));
        const PixelHeatmap video = video_heatmap(dets, g, sigma);
        const PixelHeatmap frame = frame_heatmap(dets.frame(0), g, sigma);
        for (std::size_t i = 0; i < video.values.size(); ++i) {
            CHECK(video.values[i] == doctest::Approx(frame.values[i]).epsilon(1e-12));
        }
    }

    SUBCASE("disjoint single boxes in two frames peak at one half") {
        const PatchGeometry g2(2, 1, 32, 32, 1, 4, 4);
        DetectionSet dets(2);
        dets.add(0, BoundingBox(6, 6, 4, 4));
        dets.add(1, BoundingBox(26, 26, 4, 4));
        const PixelHeatmap video = video_heatmap(dets, g2, SigmaPolicy::fixed(1.5));
        CHECK(video.at(6, 6) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(video.at(26, 26) == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("heatmaps are linear in the box set") {
    const PatchGeometry g = small_frame();
    const SigmaPolicy sigma = SigmaPolicy::box_scaled(1.0 / 6.0);
    rng::SplitMix64 gen(2024);
    std::vector<BoundingBox> a;
    std::vector<BoundingBox> b;
    for (int i = 0; i < 5; ++i) {
        a.emplace_back(gen.uniform01() * 32, gen.uniform01() * 32, 2 + gen.uniform01() * 8,
                       2 + gen.uniform01() * 8);
        b.emplace_back(gen.uniform01() * 32, gen.uniform01() * 32, 2 + gen.uniform01() * 8,
                       2 + gen.uniform01() * 8);
    }
    std::vector<BoundingBox> both = a;
    both.insert(both.end(), b.begin(), b.end());

    const PixelHeatmap ma = frame_heatmap(a, g, sigma);
    const PixelHeatmap mb = frame_heatmap(b, g, sigma);
    const PixelHeatmap mab = frame_heatmap(both, g, sigma);
    for (std::size_t i = 0; i < mab.values.size(); ++i) {
        CHECK(std::abs(mab.values[i] - (ma.values[i] + mb.values[i])) <= 1e-12);
    }
}

TEST_CASE("integer shifts translate the heatmap") {
    const PatchGeometry g = small_frame();
    const SigmaPolicy sigma = SigmaPolicy::fixed(2.0);
    const std::vector<BoundingBox> boxes{BoundingBox(9, 11, 5, 7), BoundingBox(15, 4, 3, 3)};
    const int dx = 4;
    const int dy = -2;
    std::vector<BoundingBox> shifted;
    for (const BoundingBox& b : boxes) {
        shifted.emplace_back(b.cx + dx, b.cy + dy, b.sx, b.sy);
    }
    const PixelHeatmap base = frame_heatmap(boxes, g, sigma);
    const PixelHeatmap moved = frame_heatmap(shifted, g, sigma);
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const int sx = x + dx;
            const int sy = y + dy;
            if (sx < 0 || sx >= g.width || sy < 0 || sy >= g.height) continue;
            CHECK(moved.at(sy, sx) == doctest::Approx(base.at(y, x)).epsilon(1e-14));
        }
    }
}

TEST_CASE("peak value is bounded by total box count over T") {
    const PatchGeometry g = small_frame();
    rng::SplitMix64 gen(7);
    DetectionSet dets(g.frames);
    std::size_t total = 0;
    for (int t = 0; t < g.frames; ++t) {
        const int n = static_cast<int>(gen.bounded(4));
        for (int i = 0; i < n; ++i) {
            dets.add(t, BoundingBox(gen.uniform01() * 32, gen.uniform01() * 32, 3, 3));
            ++total;
        }
    }
    const PixelHeatmap map = video_heatmap(dets, g, SigmaPolicy::fixed(2.0));
    double peak = 0.0;
    for (double v : map.values) peak = std::max(peak, v);
    CHECK(peak <= static_cast<double>(total) / g.frames + 1e-12);
}

TEST_CASE("a centered box yields a reflection-symmetric heatmap") {
    const PatchGeometry g(1, 1, 33, 33, 1, 3, 3);
    const std::vector<BoundingBox> boxes{BoundingBox(16, 16, 9, 9)};
    const PixelHeatmap map = frame_heatmap(boxes, g, SigmaPolicy::fixed(2.0));
    for (int y = 0; y < 33; ++y) {
        for (int x = 0; x < 33; ++x) {
            CHECK(map.at(y, x) == map.at(y, 32 - x));
            CHECK(map.at(y, x) == map.at(32 - y, x));
        }
    }
}

TEST_CASE("3-sigma truncation deviates by at most exp(-4.5) per box") {
    const PatchGeometry g = small_frame();
    const SigmaPolicy sigma = SigmaPolicy::box_scaled(1.0 / 6.0);
    rng::SplitMix64 gen(31);
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < 6; ++i) {
        boxes.emplace_back(gen.uniform01() * 32, gen.uniform01() * 32,
                           3 + gen.uniform01() * 10, 3 + gen.uniform01() * 10);
    }
    const PixelHeatmap full = frame_heatmap(boxes, g, sigma, false);
    const PixelHeatmap cut = frame_heatmap(boxes, g, sigma, true);
    const double bound = static_cast<double>(boxes.size()) * std::exp(-4.5) + 1e-15;
    for (std::size_t i = 0; i < full.values.size(); ++i) {
        const double dev = full.values[i] - cut.values[i];
        CHECK(dev >= 0.0);
        CHECK(dev <= bound);
    }
}

TEST_CASE("frame count mismatches are rejected") {
    DetectionSet dets(3);
    CHECK_THROWS_AS(video_heatmap(dets, small_frame(), SigmaPolicy::fixed(1.0)),
                    ShapeError);
}
