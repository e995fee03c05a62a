#pragma once

#include <cstdint>
#include <vector>

#include "soar/core_types.hpp"
#include "soar/loss.hpp"
#include "soar/masking.hpp"
#include "soar/objectness.hpp"

namespace soar {

// Minimal masked autoencoder: linear patch embedding, one tanh-activated
// linear encoder layer, a learned mask token, and a linear decoder back to
// patch values. Positional encodings are fixed sinusoids. No attention;
// each token flows through the pipeline independently.
struct ToyModel {
    PatchGeometry geometry;
    int dim = 0; // D

    std::vector<double> embed_w;    // D x P, row-major
    std::vector<double> embed_b;    // D
    std::vector<double> encoder_w;  // D x D, row-major, no bias
    std::vector<double> mask_token; // D
    std::vector<double> decoder_w;  // P x D, row-major
    std::vector<double> decoder_b;  // P
    std::vector<double> positional; // N x D, fixed, not a parameter

    static ToyModel zeros(const PatchGeometry& geometry, int dim);
    static ToyModel random_init(const PatchGeometry& geometry, int dim,
                                std::uint64_t seed);

    std::size_t param_count() const;
};

// Deterministic sinusoidal table: row i holds sin/cos pairs of i scaled by
// 10000^(-2j/D).
std::vector<double> sinusoidal_positions(int tokens, int dim);

struct ToyGradients {
    std::vector<double> embed_w;
    std::vector<double> embed_b;
    std::vector<double> encoder_w;
    std::vector<double> mask_token;
    std::vector<double> decoder_w;
    std::vector<double> decoder_b;

    static ToyGradients zeros_like(const ToyModel& model);
    void accumulate(const ToyGradients& other);
    void scale(double factor);
};

// Visible tokens: decoder(encoder(embed(patch) + pos)).
// Masked tokens:  decoder(encoder(mask_token + pos)).
Reconstruction forward(const ToyModel& model, const VideoTensor& video,
                       const MaskSpec& mask);

// Exact gradients of weighted_mse(forward(...)) for every parameter.
ToyGradients backward(const ToyModel& model, const VideoTensor& video,
                      const MaskSpec& mask, const LossWeights& weights);

namespace serial {
Reconstruction forward(const ToyModel& model, const VideoTensor& video,
                       const MaskSpec& mask);
ToyGradients backward(const ToyModel& model, const VideoTensor& video,
                      const MaskSpec& mask, const LossWeights& weights);
} // namespace serial

struct TrainConfig {
    int steps = 500;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    int batch_size = 1;
    MaskParams mask;
    bool use_mu = true;
    bool objectness_weights = true; // false = uniform masked MSE
};

struct TrainSample {
    VideoTensor video;
    ObjectnessMap objectness;       // spatial scores driving masks and weights
    std::vector<int> object_tokens; // ground truth, ascending
};

struct TraceRow {
    int step = 0;
    double total_loss = 0.0;
    double object_mse = 0.0;
    double background_mse = 0.0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
};

// Plain gradient descent. A fresh mask is drawn per (sample, step) from
// derive({seed, sample_id, step}); the per-step metrics evaluate the model
// with every token masked, splitting per-element MSE into ground-truth
// object tokens and the rest.
TrainTrace train(ToyModel& model, const std::vector<TrainSample>& dataset,
                 const TrainConfig& config);

// The evaluation used for the trace columns; exposed for comparisons.
struct EvalResult {
    double object_mse = 0.0;
    double background_mse = 0.0;
};
EvalResult evaluate_blind(const ToyModel& model, const std::vector<TrainSample>& dataset);

} // namespace soar
