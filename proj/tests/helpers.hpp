#pragma once

#include <vector>

#include "soar/heatmap.hpp"
#include "soar/objectness.hpp"
#include "soar/synth.hpp"
#include "soar/toymae.hpp"

namespace soar::testing {

// Full signal pipeline for one synthetic video: detections -> pixel
// heatmap -> patch objectness.
inline TrainSample make_sample(const SynthConfig& config, std::uint64_t seed) {
    SynthResult r = generate(config, seed);
    const PixelHeatmap heat =
        video_heatmap(r.detections, config.geometry, SigmaPolicy::box_scaled(1.0 / 6.0));
    ObjectnessMap objectness = patch_objectness(heat, config.geometry);
    return TrainSample{std::move(r.video), std::move(objectness),
                       std::move(r.object_tokens)};
}

inline std::vector<TrainSample> make_dataset(const SynthConfig& config,
                                             std::uint64_t seed, int count) {
    std::vector<TrainSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(make_sample(config, seed + static_cast<std::uint64_t>(i)));
    }
    return out;
}

} // namespace soar::testing
