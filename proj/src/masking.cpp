#include "soar/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "soar/rng.hpp"

namespace soar {

const char* strategy_name(MaskStrategy s) {
    switch (s) {
        case MaskStrategy::object_aware: return "object-aware";
        case MaskStrategy::ratio_x: return "ratio-x";
        case MaskStrategy::leaky_3d: return "leaky-3d";
        case MaskStrategy::random: return "random";
        case MaskStrategy::tube: return "tube";
        case MaskStrategy::block: return "block";
    }
    return "unknown";
}

MaskStrategy strategy_from_name(const std::string& name) {
    if (name == "object-aware") return MaskStrategy::object_aware;
    if (name == "ratio-x") return MaskStrategy::ratio_x;
    if (name == "leaky-3d") return MaskStrategy::leaky_3d;
    if (name == "random") return MaskStrategy::random;
    if (name == "tube") return MaskStrategy::tube;
    if (name == "block") return MaskStrategy::block;
    throw ParameterError("unknown masking strategy: " + name);
}

MaskParams::MaskParams(double rho_, std::uint64_t seed_, MaskStrategy strategy_, double x_)
    : rho(rho_), seed(seed_), strategy(strategy_), x(x_) {
    if (!(rho >= 0.0) || !(rho < 1.0)) {
        throw ParameterError("mask ratio leaves no visible patches (rho must be in [0,1))");
    }
    if (!(x >= 0.0) || x > 1.0) {
        throw ParameterError("foreground fraction x must be in [0,1]");
    }
}

namespace {

int round_half_even(double v) {
    const double f = std::floor(v);
    const double diff = v - f;
    if (diff > 0.5) return static_cast<int>(f) + 1;
    if (diff < 0.5) return static_cast<int>(f);
    const long long fi = static_cast<long long>(f);
    return (fi % 2 == 0) ? static_cast<int>(fi) : static_cast<int>(fi) + 1;
}

std::uint64_t strategy_tag(MaskStrategy s) {
    switch (s) {
        case MaskStrategy::object_aware: return rng::kTagObjectAware;
        case MaskStrategy::ratio_x: return rng::kTagRatioX;
        case MaskStrategy::leaky_3d: return rng::kTagLeaky3d;
        case MaskStrategy::random: return rng::kTagRandom;
        case MaskStrategy::tube: return rng::kTagTube;
        case MaskStrategy::block: return rng::kTagBlock;
    }
    return 0;
}

// Indices sorted by descending score; equal scores keep ascending index.
std::vector<int> sorted_by_score(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    return order;
}

// Core of the object-aware strategy: one visible entry per segment of the
// score-sorted index list.
std::vector<std::uint8_t> select_one_per_segment(const std::vector<double>& scores, int k,
                                                 rng::SplitMix64& gen) {
    const int n = static_cast<int>(scores.size());
    if (k <= 0) throw ParameterError("mask ratio leaves no visible patches");
    const std::vector<int> order = sorted_by_score(scores);
    const std::vector<int> lengths = segment_lengths(n, k);
    std::vector<std::uint8_t> visible(static_cast<std::size_t>(n), 0);
    int pos = 0;
    for (int s = 0; s < k; ++s) {
        const int len = lengths[static_cast<std::size_t>(s)];
        const int pick = static_cast<int>(gen.bounded(static_cast<std::uint64_t>(len)));
        visible[static_cast<std::size_t>(order[static_cast<std::size_t>(pos + pick)])] = 1;
        pos += len;
    }
    return visible;
}

// First k entries of a Fisher-Yates shuffle; draws consumed in swap order.
std::vector<int> sample_without_replacement(std::vector<int> pool, int k,
                                            rng::SplitMix64& gen) {
    const int n = static_cast<int>(pool.size());
    for (int i = 0; i < k; ++i) {
        const int j =
            i + static_cast<int>(gen.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

MaskSpec replicate_spatial(const PatchGeometry& g,
                           const std::vector<std::uint8_t>& spatial_visible) {
    std::vector<std::uint8_t> visible;
    visible.reserve(static_cast<std::size_t>(g.token_count()));
    for (int slot = 0; slot < g.temporal_slots(); ++slot) {
        visible.insert(visible.end(), spatial_visible.begin(), spatial_visible.end());
    }
    return MaskSpec(g, std::move(visible));
}

} // namespace

int visible_from_ratio(double rho, int n) {
    if (!(rho >= 0.0) || !(rho < 1.0)) {
        throw ParameterError("mask ratio leaves no visible patches (rho must be in [0,1))");
    }
    const int k = round_half_even((1.0 - rho) * static_cast<double>(n));
    return k < 1 ? 1 : k;
}

std::vector<int> segment_lengths(int n, int k) {
    if (k <= 0 || k > n) throw ParameterError("segment count must be in [1, n]");
    const int base = n / k;
    const int larger = n % k;
    std::vector<int> lengths(static_cast<std::size_t>(k), base);
    for (int i = 0; i < larger; ++i) lengths[static_cast<std::size_t>(i)] = base + 1;
    return lengths;
}

MaskSpec object_aware_mask(const ObjectnessMap& scores, const MaskParams& params) {
    if (params.strategy != MaskStrategy::object_aware) {
        throw ParameterError("object_aware_mask called with a different strategy");
    }
    const PatchGeometry& g = scores.geometry;
    if (scores.spatial.size() != static_cast<std::size_t>(g.spatial_count())) {
        throw ShapeError("objectness map size does not match geometry");
    }
    const int k = visible_from_ratio(params.rho, g.spatial_count());
    rng::SplitMix64 gen(rng::derive({params.seed, strategy_tag(params.strategy)}));
    const auto spatial_visible = select_one_per_segment(scores.spatial, k, gen);
    return replicate_spatial(g, spatial_visible);
}

MaskSpec ratio_x_mask(const TokenScores& scores, int visible_n, double x,
                      std::uint64_t seed) {
    const PatchGeometry& g = scores.geometry;
    const int n = g.token_count();
    if (static_cast<int>(scores.scores.size()) != n) {
        throw ShapeError("token score length does not match geometry");
    }
    if (visible_n < 0 || visible_n > n) {
        throw ParameterError("visible token count exceeds token count");
    }
    if (!(x >= 0.0) || x > 1.0) {
        throw ParameterError("foreground fraction x must be in [0,1]");
    }

    std::vector<int> foreground;
    std::vector<int> background;
    for (int i = 0; i < n; ++i) {
        if (scores.scores[static_cast<std::size_t>(i)] > scores.mu) {
            foreground.push_back(i);
        } else {
            background.push_back(i);
        }
    }

    int take_fg = round_half_even(x * static_cast<double>(visible_n));
    int take_bg = visible_n - take_fg;
    // Deficits spill into the other pool.
    if (take_fg > static_cast<int>(foreground.size())) {
        take_bg += take_fg - static_cast<int>(foreground.size());
        take_fg = static_cast<int>(foreground.size());
    }
    if (take_bg > static_cast<int>(background.size())) {
        take_fg += take_bg - static_cast<int>(background.size());
        take_bg = static_cast<int>(background.size());
    }

    rng::SplitMix64 gen(rng::derive({seed, rng::kTagRatioX}));
    std::vector<std::uint8_t> visible(static_cast<std::size_t>(n), 0);
    for (int i : sample_without_replacement(foreground, take_fg, gen)) {
        visible[static_cast<std::size_t>(i)] = 1;
    }
    for (int i : sample_without_replacement(background, take_bg, gen)) {
        visible[static_cast<std::size_t>(i)] = 1;
    }
    return MaskSpec(g, std::move(visible));
}

MaskSpec leaky_3d_mask(const TokenScores& scores, const MaskParams& params) {
    if (params.strategy != MaskStrategy::leaky_3d) {
        throw ParameterError("leaky_3d_mask called with a different strategy");
    }
    const PatchGeometry& g = scores.geometry;
    if (static_cast<int>(scores.scores.size()) != g.token_count()) {
        throw ShapeError("token score length does not match geometry");
    }
    const int k = visible_from_ratio(params.rho, g.token_count());
    rng::SplitMix64 gen(rng::derive({params.seed, strategy_tag(params.strategy)}));
    auto visible = select_one_per_segment(scores.scores, k, gen);
    return MaskSpec(g, std::move(visible));
}

BlockShape block_shape(const PatchGeometry& geometry, double rho) {
    const int rows = geometry.patch_rows();
    const int cols = geometry.patch_cols();
    const int target = visible_from_ratio(rho, geometry.spatial_count());
    BlockShape best;
    long long best_area_err = -1;
    double best_aspect = 0.0;
    for (int a = 1; a <= rows; ++a) {
        for (int b = 1; b <= cols; ++b) {
            const long long area_err = std::llabs(static_cast<long long>(a) * b - target);
            const double aspect =
                static_cast<double>(std::max(a, b)) / static_cast<double>(std::min(a, b));
            const bool better =
                best_area_err < 0 || area_err < best_area_err ||
                (area_err == best_area_err && aspect < best_aspect) ||
                (area_err == best_area_err && aspect == best_aspect && a < best.rows);
            if (better) {
                best = BlockShape{a, b};
                best_area_err = area_err;
                best_aspect = aspect;
            }
        }
    }
    return best;
}

MaskSpec baseline_mask(const PatchGeometry& geometry, const MaskParams& params) {
    rng::SplitMix64 gen(rng::derive({params.seed, strategy_tag(params.strategy)}));
    const int spatial = geometry.spatial_count();

    switch (params.strategy) {
        case MaskStrategy::random: {
            const int n = geometry.token_count();
            const int k = visible_from_ratio(params.rho, n);
            std::vector<int> pool(static_cast<std::size_t>(n));
            std::iota(pool.begin(), pool.end(), 0);
            std::vector<std::uint8_t> visible(static_cast<std::size_t>(n), 0);
            for (int i : sample_without_replacement(std::move(pool), k, gen)) {
                visible[static_cast<std::size_t>(i)] = 1;
            }
            return MaskSpec(geometry, std::move(visible));
        }
        case MaskStrategy::tube: {
            const int k = visible_from_ratio(params.rho, spatial);
            std::vector<int> pool(static_cast<std::size_t>(spatial));
            std::iota(pool.begin(), pool.end(), 0);
            std::vector<std::uint8_t> spatial_visible(static_cast<std::size_t>(spatial), 0);
            for (int i : sample_without_replacement(std::move(pool), k, gen)) {
                spatial_visible[static_cast<std::size_t>(i)] = 1;
            }
            return replicate_spatial(geometry, spatial_visible);
        }
        case MaskStrategy::block: {
            const BlockShape shape = block_shape(geometry, params.rho);
            const int rows = geometry.patch_rows();
            const int cols = geometry.patch_cols();
            const int row0 = static_cast<int>(
                gen.bounded(static_cast<std::uint64_t>(rows - shape.rows + 1)));
            const int col0 = static_cast<int>(
                gen.bounded(static_cast<std::uint64_t>(cols - shape.cols + 1)));
            std::vector<std::uint8_t> spatial_visible(static_cast<std::size_t>(spatial), 0);
            for (int r = row0; r < row0 + shape.rows; ++r) {
                for (int c = col0; c < col0 + shape.cols; ++c) {
                    spatial_visible[static_cast<std::size_t>(r) * cols + c] = 1;
                }
            }
            return replicate_spatial(geometry, spatial_visible);
        }
        default:
            throw ParameterError("baseline_mask expects random, tube, or block");
    }
}

} // namespace soar
