#include "soar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "soar/rng.hpp"

namespace soar {

namespace {

// Triangular reflection of p into [0, limit].
double reflect(double p, double limit) {
    if (limit <= 0.0) return 0.0;
    const double period = 2.0 * limit;
    double u = std::fmod(p, period);
    if (u < 0.0) u += period;
    return u <= limit ? u : period - u;
}

// Checkerboard plus a diagonal ramp, in object-local pixel coordinates.
double texture(int dx, int dy, int side, std::uint64_t texture_seed) {
    const int phase = static_cast<int>(texture_seed % 2);
    const double checker = ((dx + dy + phase) % 2 == 0) ? 1.0 : -1.0;
    const double ramp = 0.5 * static_cast<double>(dx - dy) / static_cast<double>(side);
    return checker + ramp;
}

struct ObjectTrack {
    // Integer top-left corner per frame.
    std::vector<int> x0;
    std::vector<int> y0;
};

} // namespace

int object_side_from_coverage(double coverage, const PatchGeometry& geometry) {
    if (!(coverage > 0.0) || coverage > 0.5) {
        throw ParameterError("object coverage must lie in (0, 0.5]");
    }
    const double area = coverage * geometry.height * geometry.width;
    return static_cast<int>(std::lround(std::sqrt(area)));
}

SynthResult generate(const SynthConfig& config, std::uint64_t seed) {
    const PatchGeometry& g = config.geometry;
    if (config.object_count < 1) throw ParameterError("object count must be at least 1");

    const int side = config.object_size > 0 ? config.object_size
                                            : object_side_from_coverage(config.coverage, g);
    if (side < 1 || side > g.height || side > g.width) {
        throw ParameterError("object does not fit in the frame");
    }
    if (!(config.noise_amplitude >= 0.0) || !(config.signal_amplitude >= 0.0)) {
        throw ParameterError("amplitudes must be non-negative");
    }
    if (config.dropout < 0.0 || config.dropout > 1.0) {
        throw ParameterError("dropout must lie in [0,1]");
    }

    const int limit_x = g.width - side;
    const int limit_y = g.height - side;

    // Integer track per object; drift is reflected at the borders.
    rng::SplitMix64 place(rng::derive({seed, rng::kTagSynthPlacement}));
    std::vector<ObjectTrack> tracks(static_cast<std::size_t>(config.object_count));
    for (ObjectTrack& track : tracks) {
        const double start_x =
            static_cast<double>(place.bounded(static_cast<std::uint64_t>(limit_x + 1)));
        const double start_y =
            static_cast<double>(place.bounded(static_cast<std::uint64_t>(limit_y + 1)));
        track.x0.resize(static_cast<std::size_t>(g.frames));
        track.y0.resize(static_cast<std::size_t>(g.frames));
        for (int f = 0; f < g.frames; ++f) {
            double px = start_x;
            double py = start_y;
            if (config.motion == MotionKind::linear_drift) {
                px = reflect(start_x + config.drift_x * f, static_cast<double>(limit_x));
                py = reflect(start_y + config.drift_y * f, static_cast<double>(limit_y));
            }
            track.x0[static_cast<std::size_t>(f)] =
                std::clamp(static_cast<int>(std::lround(px)), 0, limit_x);
            track.y0[static_cast<std::size_t>(f)] =
                std::clamp(static_cast<int>(std::lround(py)), 0, limit_y);
        }
    }

    // Background noise in index order, then object texture on top.
    rng::SplitMix64 noise(rng::derive({seed, rng::kTagSynthNoise}));
    std::vector<double> data(g.value_count());
    for (double& v : data) v = noise.symmetric(config.noise_amplitude);

    auto offset = [&g](int f, int c, int y, int x) {
        return ((static_cast<std::size_t>(f) * g.channels + c) * g.height + y) * g.width + x;
    };
    for (int f = 0; f < g.frames; ++f) {
        for (const ObjectTrack& track : tracks) {
            const int x0 = track.x0[static_cast<std::size_t>(f)];
            const int y0 = track.y0[static_cast<std::size_t>(f)];
            for (int dy = 0; dy < side; ++dy) {
                for (int dx = 0; dx < side; ++dx) {
                    const double v = config.signal_amplitude *
                                     texture(dx, dy, side, config.texture_seed);
                    for (int c = 0; c < g.channels; ++c) {
                        data[offset(f, c, y0 + dy, x0 + dx)] = v;
                    }
                }
            }
        }
    }

    // Reported detections; exact unless degradation is enabled.
    rng::SplitMix64 jitter(rng::derive({seed, rng::kTagSynthJitter}));
    DetectionSet detections(g.frames);
    const double half = (static_cast<double>(side) - 1.0) / 2.0;
    for (int f = 0; f < g.frames; ++f) {
        for (const ObjectTrack& track : tracks) {
            if (config.dropout > 0.0 && jitter.uniform01() < config.dropout) continue;
            double cx = track.x0[static_cast<std::size_t>(f)] + half;
            double cy = track.y0[static_cast<std::size_t>(f)] + half;
            double sx = static_cast<double>(side);
            double sy = sx;
            if (config.jitter_center > 0.0) {
                cx += jitter.symmetric(config.jitter_center);
                cy += jitter.symmetric(config.jitter_center);
            }
            if (config.jitter_size > 0.0) {
                sx *= std::max(0.05, 1.0 + jitter.symmetric(config.jitter_size));
                sy *= std::max(0.05, 1.0 + jitter.symmetric(config.jitter_size));
            }
            detections.add(f, BoundingBox(cx, cy, sx, sy));
        }
    }

    // Ground truth: tokens whose cell intersects any object footprint in
    // any frame of the slot.
    std::vector<std::vector<int>> per_slot(static_cast<std::size_t>(g.temporal_slots()));
    std::set<int> all_tokens;
    for (int slot = 0; slot < g.temporal_slots(); ++slot) {
        std::set<int> slot_tokens;
        for (int f = slot * g.patch_t; f < (slot + 1) * g.patch_t; ++f) {
            for (const ObjectTrack& track : tracks) {
                const int x0 = track.x0[static_cast<std::size_t>(f)];
                const int y0 = track.y0[static_cast<std::size_t>(f)];
                const int row0 = y0 / g.patch_h;
                const int row1 = (y0 + side - 1) / g.patch_h;
                const int col0 = x0 / g.patch_w;
                const int col1 = (x0 + side - 1) / g.patch_w;
                for (int r = row0; r <= row1; ++r) {
                    for (int c = col0; c <= col1; ++c) {
                        slot_tokens.insert(token_index(slot, r, c, g));
                    }
                }
            }
        }
        per_slot[static_cast<std::size_t>(slot)].assign(slot_tokens.begin(),
                                                        slot_tokens.end());
        all_tokens.insert(slot_tokens.begin(), slot_tokens.end());
    }

    SynthResult result{VideoTensor(g, std::move(data)), std::move(detections),
                       std::move(per_slot),
                       std::vector<int>(all_tokens.begin(), all_tokens.end())};
    return result;
}

} // namespace soar
