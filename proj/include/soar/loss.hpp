#pragma once

#include <vector>

#include "soar/core_types.hpp"
#include "soar/objectness.hpp"

namespace soar {

// Normalized per-token weights over the invisible set: each masked token
// carries (score + mu) / sum(score + mu), mu being the mean score over all
// N tokens (dropped when mu_used is false). Sums to 1 unless every term is
// zero, in which case the weights fall back to uniform.
struct LossWeights {
    std::vector<int> tokens;     // K^inv, ascending
    std::vector<double> weights; // aligned with tokens
    bool mu_used = true;
    double mu_value = 0.0;
};

LossWeights loss_weights(const TokenScores& scores, const MaskSpec& mask, bool use_mu);

// Uniform 1/|K^inv| weights; the plain masked-MSE configuration.
LossWeights uniform_weights(const MaskSpec& mask);

// Predicted patch values for all N tokens, token-major; each token block
// holds patch_elems() values in extract_patch order.
struct Reconstruction {
    PatchGeometry geometry;
    std::vector<double> values;

    Reconstruction() = default;
    Reconstruction(PatchGeometry geometry, std::vector<double> values);

    const double* token(int i) const {
        return values.data() + static_cast<std::size_t>(i) * geometry.patch_elems();
    }
    double* token(int i) {
        return values.data() + static_cast<std::size_t>(i) * geometry.patch_elems();
    }
};

// sum_{i in K^inv} w_i * mean_e (V_ie - R_ie)^2. The per-patch error is the
// mean over patch elements, so uniform weights reduce to the ordinary
// per-element masked MSE.
double weighted_mse(const VideoTensor& original, const Reconstruction& recon,
                    const LossWeights& weights);

// d(loss)/d(recon): -2 * w_i / patch_elems * (V_i - R_i) on masked tokens,
// zero elsewhere. Same layout as Reconstruction::values.
std::vector<double> weighted_mse_gradient(const VideoTensor& original,
                                          const Reconstruction& recon,
                                          const LossWeights& weights);

namespace serial {
double weighted_mse(const VideoTensor& original, const Reconstruction& recon,
                    const LossWeights& weights);
std::vector<double> weighted_mse_gradient(const VideoTensor& original,
                                          const Reconstruction& recon,
                                          const LossWeights& weights);
} // namespace serial

} // namespace soar
