#include "soar/toymae.hpp"

#include <algorithm>
#include <cmath>

#include "soar/parallel.hpp"
#include "soar/rng.hpp"

namespace soar {

namespace {

// y = M(rows x cols) * v (+ b)
void matvec(const double* m, const double* v, const double* bias, double* y, int rows,
            int cols) {
    for (int r = 0; r < rows; ++r) {
        double acc = bias ? bias[r] : 0.0;
        const double* row = m + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += row[c] * v[c];
        y[r] = acc;
    }
}

// y = M^T * v, M is rows x cols
void matvec_t(const double* m, const double* v, double* y, int rows, int cols) {
    for (int c = 0; c < cols; ++c) y[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* row = m + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) y[c] += row[c] * v[r];
    }
}

void check_forward_shapes(const ToyModel& model, const VideoTensor& video,
                          const MaskSpec& mask) {
    if (!(model.geometry == video.geometry) || !(model.geometry == mask.geometry)) {
        throw ShapeError("model, video, and mask geometries must agree");
    }
    if (model.dim < 1) throw ParameterError("model dimension must be at least 1");
}

// Backward treats every weighted token as masked (mask-token input).
void check_backward_weights(const MaskSpec& mask, const LossWeights& weights) {
    for (int t : weights.tokens) {
        if (mask.is_visible(t)) {
            throw ShapeError("loss weights cover a visible token");
        }
    }
}

// One token end to end. Output buffer holds P values.
void token_forward(const ToyModel& model, const VideoTensor& video, bool visible,
                   int token, double* out) {
    const int d = model.dim;
    const int p = model.geometry.patch_elems();
    std::vector<double> x(static_cast<std::size_t>(d));
    if (visible) {
        const std::vector<double> patch = extract_patch(video, token);
        matvec(model.embed_w.data(), patch.data(), model.embed_b.data(), x.data(), d, p);
    } else {
        std::copy(model.mask_token.begin(), model.mask_token.end(), x.begin());
    }
    const double* pos = model.positional.data() + static_cast<std::size_t>(token) * d;
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] += pos[i];

    std::vector<double> h(static_cast<std::size_t>(d));
    matvec(model.encoder_w.data(), x.data(), nullptr, h.data(), d, d);
    for (double& v : h) v = std::tanh(v);

    matvec(model.decoder_w.data(), h.data(), model.decoder_b.data(), out, p, d);
}

// Per-token intermediates for the masked tokens a backward pass touches.
struct BackwardScratch {
    int m = 0; // token count
    int d = 0;
    int p = 0;
    std::vector<double> x;     // m x d, encoder input
    std::vector<double> h;     // m x d, tanh activations
    std::vector<double> d_z;   // m x d
    std::vector<double> d_x;   // m x d
    std::vector<double> d_out; // m x p
};

// Fills one scratch slot. Only invisible tokens carry loss, so the input
// is always mask_token + positional.
void token_backward_local(const ToyModel& model, const VideoTensor& video, int token,
                          double weight, int j, BackwardScratch& s) {
    const int d = s.d;
    const int p = s.p;
    double* x = s.x.data() + static_cast<std::size_t>(j) * d;
    double* h = s.h.data() + static_cast<std::size_t>(j) * d;
    double* d_z = s.d_z.data() + static_cast<std::size_t>(j) * d;
    double* d_x = s.d_x.data() + static_cast<std::size_t>(j) * d;
    double* d_out = s.d_out.data() + static_cast<std::size_t>(j) * p;

    const double* pos = model.positional.data() + static_cast<std::size_t>(token) * d;
    for (int i = 0; i < d; ++i) x[i] = model.mask_token[static_cast<std::size_t>(i)] + pos[i];

    matvec(model.encoder_w.data(), x, nullptr, h, d, d);
    for (int i = 0; i < d; ++i) h[i] = std::tanh(h[i]);

    std::vector<double> out(static_cast<std::size_t>(p));
    matvec(model.decoder_w.data(), h, model.decoder_b.data(), out.data(), p, d);

    const std::vector<double> target = extract_patch(video, token);
    const double scale = 2.0 * weight / static_cast<double>(p);
    for (int e = 0; e < p; ++e) {
        d_out[e] = scale * (out[static_cast<std::size_t>(e)] -
                            target[static_cast<std::size_t>(e)]);
    }

    std::vector<double> d_h(static_cast<std::size_t>(d));
    matvec_t(model.decoder_w.data(), d_out, d_h.data(), p, d);
    for (int i = 0; i < d; ++i) d_z[i] = d_h[static_cast<std::size_t>(i)] * (1.0 - h[i] * h[i]);
    matvec_t(model.encoder_w.data(), d_z, d_x, d, d);
}

} // namespace

std::vector<double> sinusoidal_positions(int tokens, int dim) {
    if (tokens < 1 || dim < 1) throw ParameterError("positional table needs positive sizes");
    std::vector<double> table(static_cast<std::size_t>(tokens) * dim);
    const double log_base = std::log(10000.0);
    for (int i = 0; i < tokens; ++i) {
        for (int d = 0; d < dim; ++d) {
            const int pair = d / 2;
            const double freq = std::exp(-log_base * (2.0 * pair) / static_cast<double>(dim));
            const double angle = static_cast<double>(i) * freq;
            table[static_cast<std::size_t>(i) * dim + d] =
                (d % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return table;
}

ToyModel ToyModel::zeros(const PatchGeometry& geometry, int dim) {
    if (dim < 1) throw ParameterError("model dimension must be at least 1");
    ToyModel m;
    m.geometry = geometry;
    m.dim = dim;
    const std::size_t d = static_cast<std::size_t>(dim);
    const std::size_t p = static_cast<std::size_t>(geometry.patch_elems());
    m.embed_w.assign(d * p, 0.0);
    m.embed_b.assign(d, 0.0);
    m.encoder_w.assign(d * d, 0.0);
    m.mask_token.assign(d, 0.0);
    m.decoder_w.assign(p * d, 0.0);
    m.decoder_b.assign(p, 0.0);
    m.positional = sinusoidal_positions(geometry.token_count(), dim);
    return m;
}

ToyModel ToyModel::random_init(const PatchGeometry& geometry, int dim,
                               std::uint64_t seed) {
    ToyModel m = zeros(geometry, dim);
    rng::SplitMix64 gen(rng::derive({seed, rng::kTagModelInit}));
    const double p_scale = 1.0 / std::sqrt(static_cast<double>(geometry.patch_elems()));
    const double d_scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (double& v : m.embed_w) v = gen.symmetric(p_scale);
    for (double& v : m.embed_b) v = gen.symmetric(0.01);
    for (double& v : m.encoder_w) v = gen.symmetric(d_scale);
    for (double& v : m.mask_token) v = gen.symmetric(d_scale);
    for (double& v : m.decoder_w) v = gen.symmetric(d_scale);
    for (double& v : m.decoder_b) v = gen.symmetric(0.01);
    return m;
}

std::size_t ToyModel::param_count() const {
    return embed_w.size() + embed_b.size() + encoder_w.size() + mask_token.size() +
           decoder_w.size() + decoder_b.size();
}

ToyGradients ToyGradients::zeros_like(const ToyModel& model) {
    ToyGradients g;
    g.embed_w.assign(model.embed_w.size(), 0.0);
    g.embed_b.assign(model.embed_b.size(), 0.0);
    g.encoder_w.assign(model.encoder_w.size(), 0.0);
    g.mask_token.assign(model.mask_token.size(), 0.0);
    g.decoder_w.assign(model.decoder_w.size(), 0.0);
    g.decoder_b.assign(model.decoder_b.size(), 0.0);
    return g;
}

void ToyGradients::accumulate(const ToyGradients& other) {
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(embed_w, other.embed_w);
    add(embed_b, other.embed_b);
    add(encoder_w, other.encoder_w);
    add(mask_token, other.mask_token);
    add(decoder_w, other.decoder_w);
    add(decoder_b, other.decoder_b);
}

void ToyGradients::scale(double factor) {
    auto mul = [factor](std::vector<double>& a) {
        for (double& v : a) v *= factor;
    };
    mul(embed_w);
    mul(embed_b);
    mul(encoder_w);
    mul(mask_token);
    mul(decoder_w);
    mul(decoder_b);
}

namespace serial {

Reconstruction forward(const ToyModel& model, const VideoTensor& video,
                       const MaskSpec& mask) {
    check_forward_shapes(model, video, mask);
    const int n = model.geometry.token_count();
    const int p = model.geometry.patch_elems();
    std::vector<double> values(static_cast<std::size_t>(n) * p);
    for (int token = 0; token < n; ++token) {
        token_forward(model, video, mask.is_visible(token), token,
                      values.data() + static_cast<std::size_t>(token) * p);
    }
    return Reconstruction(model.geometry, std::move(values));
}

ToyGradients backward(const ToyModel& model, const VideoTensor& video,
                      const MaskSpec& mask, const LossWeights& weights) {
    check_forward_shapes(model, video, mask);
    check_backward_weights(mask, weights);
    const int d = model.dim;
    const int p = model.geometry.patch_elems();
    const int m = static_cast<int>(weights.tokens.size());

    BackwardScratch s;
    s.m = m;
    s.d = d;
    s.p = p;
    s.x.resize(static_cast<std::size_t>(m) * d);
    s.h.resize(static_cast<std::size_t>(m) * d);
    s.d_z.resize(static_cast<std::size_t>(m) * d);
    s.d_x.resize(static_cast<std::size_t>(m) * d);
    s.d_out.resize(static_cast<std::size_t>(m) * p);

    for (int j = 0; j < m; ++j) {
        token_backward_local(model, video, weights.tokens[static_cast<std::size_t>(j)],
                             weights.weights[static_cast<std::size_t>(j)], j, s);
    }

    // Visible tokens never enter the loss, so the embedding parameters
    // receive exactly zero gradient.
    ToyGradients g = ToyGradients::zeros_like(model);
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                acc += s.d_out[static_cast<std::size_t>(j) * p + r] *
                       s.h[static_cast<std::size_t>(j) * d + c];
            }
            g.decoder_w[static_cast<std::size_t>(r) * d + c] = acc;
        }
    }
    for (int r = 0; r < p; ++r) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += s.d_out[static_cast<std::size_t>(j) * p + r];
        g.decoder_b[static_cast<std::size_t>(r)] = acc;
    }
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                acc += s.d_z[static_cast<std::size_t>(j) * d + a] *
                       s.x[static_cast<std::size_t>(j) * d + b];
            }
            g.encoder_w[static_cast<std::size_t>(a) * d + b] = acc;
        }
    }
    for (int a = 0; a < d; ++a) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += s.d_x[static_cast<std::size_t>(j) * d + a];
        g.mask_token[static_cast<std::size_t>(a)] = acc;
    }
    return g;
}

} // namespace serial

Reconstruction forward(const ToyModel& model, const VideoTensor& video,
                       const MaskSpec& mask) {
    check_forward_shapes(model, video, mask);
    const int n = model.geometry.token_count();
    const int p = model.geometry.patch_elems();
    std::vector<double> values(static_cast<std::size_t>(n) * p);
    double* out = values.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int token = 0; token < n; ++token) {
        token_forward(model, video, mask.is_visible(token), token,
                      out + static_cast<std::size_t>(token) * p);
    }
    return Reconstruction(model.geometry, std::move(values));
}

ToyGradients backward(const ToyModel& model, const VideoTensor& video,
                      const MaskSpec& mask, const LossWeights& weights) {
    check_forward_shapes(model, video, mask);
    check_backward_weights(mask, weights);
    const int d = model.dim;
    const int p = model.geometry.patch_elems();
    const int m = static_cast<int>(weights.tokens.size());

    BackwardScratch s;
    s.m = m;
    s.d = d;
    s.p = p;
    s.x.resize(static_cast<std::size_t>(m) * d);
    s.h.resize(static_cast<std::size_t>(m) * d);
    s.d_z.resize(static_cast<std::size_t>(m) * d);
    s.d_x.resize(static_cast<std::size_t>(m) * d);
    s.d_out.resize(static_cast<std::size_t>(m) * p);

#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int j = 0; j < m; ++j) {
        token_backward_local(model, video, weights.tokens[static_cast<std::size_t>(j)],
                             weights.weights[static_cast<std::size_t>(j)], j, s);
    }

    // Every parameter-gradient element is an independent dot product over
    // the token axis, accumulated in ascending j exactly like the serial
    // path, so results match bit for bit.
    ToyGradients g = ToyGradients::zeros_like(model);
    double* dec_w = g.decoder_w.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < d; ++c) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                acc += s.d_out[static_cast<std::size_t>(j) * p + r] *
                       s.h[static_cast<std::size_t>(j) * d + c];
            }
            dec_w[static_cast<std::size_t>(r) * d + c] = acc;
        }
    }
    double* dec_b = g.decoder_b.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int r = 0; r < p; ++r) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += s.d_out[static_cast<std::size_t>(j) * p + r];
        dec_b[static_cast<std::size_t>(r)] = acc;
    }
    double* enc_w = g.encoder_w.data();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                acc += s.d_z[static_cast<std::size_t>(j) * d + a] *
                       s.x[static_cast<std::size_t>(j) * d + b];
            }
            enc_w[static_cast<std::size_t>(a) * d + b] = acc;
        }
    }
    for (int a = 0; a < d; ++a) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += s.d_x[static_cast<std::size_t>(j) * d + a];
        g.mask_token[static_cast<std::size_t>(a)] = acc;
    }
    return g;
}

namespace {

MaskSpec make_train_mask(const TrainSample& sample, const TokenScores& scores,
                         const MaskParams& base, std::uint64_t mask_seed) {
    const PatchGeometry& g = sample.video.geometry;
    const MaskParams p(base.rho, mask_seed, base.strategy, base.x);
    switch (base.strategy) {
        case MaskStrategy::object_aware:
            return object_aware_mask(sample.objectness, p);
        case MaskStrategy::ratio_x:
            return ratio_x_mask(scores, visible_from_ratio(p.rho, g.token_count()), p.x,
                                mask_seed);
        case MaskStrategy::leaky_3d:
            return leaky_3d_mask(scores, p);
        default:
            return baseline_mask(g, p);
    }
}

void sgd_step(ToyModel& model, const ToyGradients& g, double lr) {
    auto apply = [lr](std::vector<double>& param, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
    };
    apply(model.embed_w, g.embed_w);
    apply(model.embed_b, g.embed_b);
    apply(model.encoder_w, g.encoder_w);
    apply(model.mask_token, g.mask_token);
    apply(model.decoder_w, g.decoder_w);
    apply(model.decoder_b, g.decoder_b);
}

} // namespace

EvalResult evaluate_blind(const ToyModel& model, const std::vector<TrainSample>& dataset) {
    const PatchGeometry& g = model.geometry;
    const int n = g.token_count();
    const int p = g.patch_elems();
    const MaskSpec all_masked(g, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));

    double object_sse = 0.0;
    double background_sse = 0.0;
    std::size_t object_elems = 0;
    std::size_t background_elems = 0;
    for (const TrainSample& s : dataset) {
        const Reconstruction recon = forward(model, s.video, all_masked);
        std::vector<std::uint8_t> is_object(static_cast<std::size_t>(n), 0);
        for (int t : s.object_tokens) is_object[static_cast<std::size_t>(t)] = 1;
        for (int token = 0; token < n; ++token) {
            const std::vector<double> target = extract_patch(s.video, token);
            const double* pred = recon.token(token);
            double sq = 0.0;
            for (int e = 0; e < p; ++e) {
                const double diff = target[static_cast<std::size_t>(e)] - pred[e];
                sq += diff * diff;
            }
            if (is_object[static_cast<std::size_t>(token)]) {
                object_sse += sq;
                object_elems += static_cast<std::size_t>(p);
            } else {
                background_sse += sq;
                background_elems += static_cast<std::size_t>(p);
            }
        }
    }
    EvalResult r;
    r.object_mse = object_elems ? object_sse / static_cast<double>(object_elems) : 0.0;
    r.background_mse =
        background_elems ? background_sse / static_cast<double>(background_elems) : 0.0;
    return r;
}

TrainTrace train(ToyModel& model, const std::vector<TrainSample>& dataset,
                 const TrainConfig& config) {
    if (dataset.empty()) throw ParameterError("training dataset is empty");
    if (config.steps < 1) throw ParameterError("training needs at least one step");
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
        throw ParameterError("learning rate must be finite and non-negative");
    }
    if (config.batch_size < 1) throw ParameterError("batch size must be at least 1");

    std::vector<TokenScores> scores;
    scores.reserve(dataset.size());
    for (const TrainSample& s : dataset) {
        if (!(s.video.geometry == model.geometry)) {
            throw ShapeError("sample geometry does not match the model");
        }
        scores.push_back(token_scores(s.objectness));
    }

    TrainTrace trace;
    trace.rows.reserve(static_cast<std::size_t>(config.steps));
    for (int step = 0; step < config.steps; ++step) {
        ToyGradients acc = ToyGradients::zeros_like(model);
        double loss_sum = 0.0;
        for (int b = 0; b < config.batch_size; ++b) {
            const int sample_id =
                (step * config.batch_size + b) % static_cast<int>(dataset.size());
            const TrainSample& s = dataset[static_cast<std::size_t>(sample_id)];
            const std::uint64_t mask_seed =
                rng::derive({config.seed, static_cast<std::uint64_t>(sample_id),
                             static_cast<std::uint64_t>(step)});
            const MaskSpec mask = make_train_mask(
                s, scores[static_cast<std::size_t>(sample_id)], config.mask, mask_seed);
            const LossWeights w =
                config.objectness_weights
                    ? loss_weights(scores[static_cast<std::size_t>(sample_id)], mask,
                                   config.use_mu)
                    : uniform_weights(mask);
            const Reconstruction recon = forward(model, s.video, mask);
            loss_sum += weighted_mse(s.video, recon, w);
            acc.accumulate(backward(model, s.video, mask, w));
        }
        loss_sum /= static_cast<double>(config.batch_size);
        acc.scale(1.0 / static_cast<double>(config.batch_size));
        if (!std::isfinite(loss_sum)) {
            throw TrainingError("training diverged: non-finite loss", step);
        }
        sgd_step(model, acc, config.learning_rate);

        const EvalResult ev = evaluate_blind(model, dataset);
        trace.rows.push_back(TraceRow{step, loss_sum, ev.object_mse, ev.background_mse});
    }
    return trace;
}

} // namespace soar
