#include "soar/loss.hpp"

#include <cmath>

#include "soar/parallel.hpp"

namespace soar {

LossWeights loss_weights(const TokenScores& scores, const MaskSpec& mask, bool use_mu) {
    if (scores.scores.size() != mask.visible.size()) {
        throw ShapeError("token scores and mask disagree on token count");
    }
    LossWeights lw;
    lw.tokens = mask.invisible_indices();
    if (lw.tokens.empty()) {
        throw ParameterError("nothing to reconstruct: every token is visible");
    }
    lw.mu_used = use_mu;
    lw.mu_value = use_mu ? scores.mu : 0.0;

    lw.weights.resize(lw.tokens.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < lw.tokens.size(); ++j) {
        const double raw =
            scores.scores[static_cast<std::size_t>(lw.tokens[j])] + lw.mu_value;
        if (raw < 0.0) throw ParameterError("objectness scores must be non-negative");
        lw.weights[j] = raw;
        sum += raw;
    }
    if (sum > 0.0) {
        for (double& w : lw.weights) w /= sum;
    } else {
        const double u = 1.0 / static_cast<double>(lw.tokens.size());
        for (double& w : lw.weights) w = u;
    }
    return lw;
}

LossWeights uniform_weights(const MaskSpec& mask) {
    LossWeights lw;
    lw.tokens = mask.invisible_indices();
    if (lw.tokens.empty()) {
        throw ParameterError("nothing to reconstruct: every token is visible");
    }
    lw.mu_used = false;
    lw.mu_value = 0.0;
    lw.weights.assign(lw.tokens.size(), 1.0 / static_cast<double>(lw.tokens.size()));
    return lw;
}

Reconstruction::Reconstruction(PatchGeometry geometry_, std::vector<double> values_)
    : geometry(geometry_), values(std::move(values_)) {
    const std::size_t expected = static_cast<std::size_t>(geometry.token_count()) *
                                 static_cast<std::size_t>(geometry.patch_elems());
    if (values.size() != expected) {
        throw ShapeError("reconstruction length does not match token count x patch size");
    }
}

namespace {

void check_shapes(const VideoTensor& original, const Reconstruction& recon,
                  const LossWeights& weights) {
    if (!(original.geometry == recon.geometry)) {
        throw ShapeError("original and reconstruction geometries differ");
    }
    if (weights.tokens.size() != weights.weights.size()) {
        throw ShapeError("loss weight token/weight lengths differ");
    }
    for (int t : weights.tokens) {
        if (t < 0 || t >= original.geometry.token_count()) {
            throw ShapeError("loss weight token index out of range");
        }
    }
}

// Weighted per-patch mean squared error for one masked token.
double token_term(const VideoTensor& original, const Reconstruction& recon,
                  int token, double weight) {
    const PatchGeometry& g = original.geometry;
    const std::vector<double> target = extract_patch(original, token);
    const double* pred = recon.token(token);
    double sq = 0.0;
    for (int e = 0; e < g.patch_elems(); ++e) {
        const double d = target[static_cast<std::size_t>(e)] - pred[e];
        sq += d * d;
    }
    return weight * (sq / static_cast<double>(g.patch_elems()));
}

void token_gradient(const VideoTensor& original, const Reconstruction& recon,
                    int token, double weight, double* out) {
    const PatchGeometry& g = original.geometry;
    const std::vector<double> target = extract_patch(original, token);
    const double* pred = recon.token(token);
    const double scale = -2.0 * weight / static_cast<double>(g.patch_elems());
    for (int e = 0; e < g.patch_elems(); ++e) {
        out[e] = scale * (target[static_cast<std::size_t>(e)] - pred[e]);
    }
}

} // namespace

namespace serial {

double weighted_mse(const VideoTensor& original, const Reconstruction& recon,
                    const LossWeights& weights) {
    check_shapes(original, recon, weights);
    double loss = 0.0;
    for (std::size_t j = 0; j < weights.tokens.size(); ++j) {
        loss += token_term(original, recon, weights.tokens[j], weights.weights[j]);
    }
    return loss;
}

std::vector<double> weighted_mse_gradient(const VideoTensor& original,
                                          const Reconstruction& recon,
                                          const LossWeights& weights) {
    check_shapes(original, recon, weights);
    std::vector<double> grad(recon.values.size(), 0.0);
    const int elems = original.geometry.patch_elems();
    for (std::size_t j = 0; j < weights.tokens.size(); ++j) {
        const int token = weights.tokens[j];
        token_gradient(original, recon, token, weights.weights[j],
                       grad.data() + static_cast<std::size_t>(token) * elems);
    }
    return grad;
}

} // namespace serial

// Parallel versions: per-token terms computed concurrently, the final
// reduction summed in ascending token order so the result is bit-identical
// to the serial path.

double weighted_mse(const VideoTensor& original, const Reconstruction& recon,
                    const LossWeights& weights) {
    check_shapes(original, recon, weights);
    const int m = static_cast<int>(weights.tokens.size());
    std::vector<double> terms(static_cast<std::size_t>(m));
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int j = 0; j < m; ++j) {
        terms[static_cast<std::size_t>(j)] = token_term(
            original, recon, weights.tokens[static_cast<std::size_t>(j)],
            weights.weights[static_cast<std::size_t>(j)]);
    }
    double loss = 0.0;
    for (int j = 0; j < m; ++j) loss += terms[static_cast<std::size_t>(j)];
    return loss;
}

std::vector<double> weighted_mse_gradient(const VideoTensor& original,
                                          const Reconstruction& recon,
                                          const LossWeights& weights) {
    check_shapes(original, recon, weights);
    std::vector<double> grad(recon.values.size(), 0.0);
    const int elems = original.geometry.patch_elems();
    const int m = static_cast<int>(weights.tokens.size());
    double* out = grad.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int j = 0; j < m; ++j) {
        const int token = weights.tokens[static_cast<std::size_t>(j)];
        token_gradient(original, recon, token, weights.weights[static_cast<std::size_t>(j)],
                       out + static_cast<std::size_t>(token) * elems);
    }
    return grad;
}

} // namespace soar
