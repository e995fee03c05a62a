#pragma once

#include <cstdint>
#include <vector>

#include "soar/core_types.hpp"

namespace soar {

enum class MotionKind { static_object, linear_drift };

// Synthetic long-tailed videos: a low-amplitude noise background with a
// small, high-amplitude textured square per object. Detections are the
// exact object boxes unless jitter/dropout noise is enabled.
struct SynthConfig {
    PatchGeometry geometry;
    int object_count = 1;
    int object_size = 0;     // square side in pixels; 0 derives from coverage
    double coverage = 0.05;  // fraction of frame area, (0, 0.5]
    MotionKind motion = MotionKind::static_object;
    double drift_x = 0.0; // pixels per frame
    double drift_y = 0.0;
    std::uint64_t texture_seed = 0;
    double noise_amplitude = 0.1;
    double signal_amplitude = 1.0;
    // Detector degradation knobs, all off by default.
    double jitter_center = 0.0; // +- pixels on the reported center
    double jitter_size = 0.0;   // relative +- on the reported size
    double dropout = 0.0;       // probability a box is dropped per frame
};

struct SynthResult {
    VideoTensor video;
    DetectionSet detections;
    std::vector<std::vector<int>> object_tokens_per_slot; // slot -> token ids
    std::vector<int> object_tokens;                       // union, ascending
};

// Side length implied by a coverage fraction: round(sqrt(coverage * H * W)).
int object_side_from_coverage(double coverage, const PatchGeometry& geometry);

SynthResult generate(const SynthConfig& config, std::uint64_t seed);

} // namespace soar
