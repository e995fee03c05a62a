#pragma once

#include <cstdint>
#include <vector>

#include "soar/core_types.hpp"
#include "soar/objectness.hpp"

namespace soar {

enum class MaskStrategy { object_aware, ratio_x, leaky_3d, random, tube, block };

const char* strategy_name(MaskStrategy s);
MaskStrategy strategy_from_name(const std::string& name);

struct MaskParams {
    double rho = 0.7;
    std::uint64_t seed = 0;
    MaskStrategy strategy = MaskStrategy::object_aware;
    double x = 0.5; // foreground fraction, ratio_x only

    MaskParams() = default;
    MaskParams(double rho, std::uint64_t seed, MaskStrategy strategy, double x = 0.5);
};

// round((1 - rho) * n), ties to even, floored at 1.
int visible_from_ratio(double rho, int n);

// Lengths of k contiguous segments covering n sorted entries: the first
// n % k segments get ceil(n/k), the rest floor(n/k). Longer segments sit
// at the high-score end.
std::vector<int> segment_lengths(int n, int k);

// Sorts spatial cells by descending score (ties broken by ascending cell
// index), partitions into visible_from_ratio(rho, N_s) segments, keeps one
// uniformly drawn cell per segment, and replicates the spatial mask over
// every temporal slot. One bounded draw per segment, in segment order.
MaskSpec object_aware_mask(const ObjectnessMap& scores, const MaskParams& params);

// Fixed-ratio variant: split tokens into foreground (score > mean) and
// background, draw round(x * visible_n) visible tokens from the foreground
// and the rest from the background. Pool deficits spill to the other pool.
MaskSpec ratio_x_mask(const TokenScores& scores, int visible_n, double x,
                      std::uint64_t seed);

// Leakage variant: segment-sorted selection applied jointly over all N
// tokens, no temporal replication.
MaskSpec leaky_3d_mask(const TokenScores& scores, const MaskParams& params);

// random: uniform token sample. tube: uniform spatial sample replicated
// over slots. block: one uniformly placed visible rectangle of area
// closest to the visible budget (ties toward square), replicated.
MaskSpec baseline_mask(const PatchGeometry& geometry, const MaskParams& params);

// Rectangle rows x cols chosen for the block baseline; exposed so tests
// can pin the shape selection.
struct BlockShape {
    int rows = 0;
    int cols = 0;
};
BlockShape block_shape(const PatchGeometry& geometry, double rho);

} // namespace soar
