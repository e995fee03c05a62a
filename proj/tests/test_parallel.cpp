#include <doctest.h>

#include <omp.h>
#include <vector>

#include "helpers.hpp"
#include "soar/heatmap.hpp"
#include "soar/loss.hpp"
#include "soar/objectness.hpp"
#include "soar/parallel.hpp"
#include "soar/rng.hpp"
#include "soar/toymae.hpp"

using namespace soar;

// The OpenMP kernels must match the serial reference implementations bit
// for bit: every output element is computed with the same operation order,
// only the scheduling differs.

namespace {

PatchGeometry geometry() { return PatchGeometry(4, 1, 48, 48, 2, 8, 8); }

DetectionSet random_detections(const PatchGeometry& g, std::uint64_t seed) {
    rng::SplitMix64 gen(seed);
    DetectionSet dets(g.frames);
    for (int t = 0; t < g.frames; ++t) {
        const int n = 1 + static_cast<int>(gen.bounded(3));
        for (int i = 0; i < n; ++i) {
            dets.add(t, BoundingBox(gen.uniform01() * g.width, gen.uniform01() * g.height,
                                    2.0 + gen.uniform01() * 12.0,
                                    2.0 + gen.uniform01() * 12.0));
        }
    }
    return dets;
}

} // namespace

TEST_CASE("heatmap kernels match the serial reference exactly") {
    const PatchGeometry g = geometry();
    const SigmaPolicy sigma = SigmaPolicy::box_scaled(1.0 / 6.0);
    CHECK(max_threads() >= 1);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const DetectionSet dets = random_detections(g, seed);
        for (bool truncate : {false, true}) {
            const PixelHeatmap par = video_heatmap(dets, g, sigma, truncate);
            const PixelHeatmap ser = serial::video_heatmap(dets, g, sigma, truncate);
            CHECK(par.values == ser.values);
            const PixelHeatmap fpar = frame_heatmap(dets.frame(0), g, sigma, truncate);
            const PixelHeatmap fser =
                serial::frame_heatmap(dets.frame(0), g, sigma, truncate);
            CHECK(fpar.values == fser.values);
        }
    }
}

TEST_CASE("objectness aggregation matches the serial reference exactly") {
    const PatchGeometry g = geometry();
    const DetectionSet dets = random_detections(g, 9);
    const PixelHeatmap heat = video_heatmap(dets, g, SigmaPolicy::fixed(3.0));
    const ObjectnessMap par = patch_objectness(heat, g);
    const ObjectnessMap ser = serial::patch_objectness(heat, g);
    CHECK(par.spatial == ser.spatial);
}

TEST_CASE("loss kernels match the serial reference exactly") {
    const PatchGeometry g = geometry();
    rng::SplitMix64 gen(33);
    std::vector<double> data(g.value_count());
    for (double& v : data) v = gen.uniform01() * 2 - 1;
    const VideoTensor video(g, data);
    std::vector<double> pred(static_cast<std::size_t>(g.token_count()) * g.patch_elems());
    for (double& v : pred) v = gen.uniform01() * 2 - 1;
    const Reconstruction recon(g, pred);

    const MaskSpec mask = baseline_mask(g, MaskParams(0.6, 3, MaskStrategy::random));
    const DetectionSet dets = random_detections(g, 4);
    const TokenScores scores =
        token_scores(patch_objectness(video_heatmap(dets, g, SigmaPolicy::fixed(2.0)), g));
    const LossWeights weights = loss_weights(scores, mask, true);

    CHECK(weighted_mse(video, recon, weights) ==
          serial::weighted_mse(video, recon, weights));
    CHECK(weighted_mse_gradient(video, recon, weights) ==
          serial::weighted_mse_gradient(video, recon, weights));
}

TEST_CASE("model kernels match the serial reference exactly") {
    const PatchGeometry g = geometry();
    const ToyModel model = ToyModel::random_init(g, 12, 21);
    rng::SplitMix64 gen(55);
    std::vector<double> data(g.value_count());
    for (double& v : data) v = gen.uniform01();
    const VideoTensor video(g, data);
    const MaskSpec mask = baseline_mask(g, MaskParams(0.7, 8, MaskStrategy::tube));
    const LossWeights weights = uniform_weights(mask);

    const Reconstruction fpar = forward(model, video, mask);
    const Reconstruction fser = serial::forward(model, video, mask);
    CHECK(fpar.values == fser.values);

    const ToyGradients gpar = backward(model, video, mask, weights);
    const ToyGradients gser = serial::backward(model, video, mask, weights);
    CHECK(gpar.encoder_w == gser.encoder_w);
    CHECK(gpar.mask_token == gser.mask_token);
    CHECK(gpar.decoder_w == gser.decoder_w);
    CHECK(gpar.decoder_b == gser.decoder_b);
    CHECK(gpar.embed_w == gser.embed_w);
    CHECK(gpar.embed_b == gser.embed_b);
}
