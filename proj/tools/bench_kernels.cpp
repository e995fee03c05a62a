// Timing comparison between the serial reference kernels and the OpenMP
// versions, plus a max-abs-difference column that must print as zero.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "soar/heatmap.hpp"
#include "soar/loss.hpp"
#include "soar/objectness.hpp"
#include "soar/parallel.hpp"
#include "soar/rng.hpp"
#include "soar/toymae.hpp"

using namespace soar;

namespace {

struct Timing {
    double serial_ms = 0.0;
    double parallel_ms = 0.0;
    double max_abs_diff = 0.0;
};

template <typename SerialFn, typename ParallelFn, typename DiffFn>
Timing run(int reps, SerialFn&& serial_fn, ParallelFn&& parallel_fn, DiffFn&& diff_fn) {
    Timing t;
    // Warm both paths once.
    auto s = serial_fn();
    auto p = parallel_fn();
    t.max_abs_diff = diff_fn(s, p);

    double t0 = omp_get_wtime();
    for (int i = 0; i < reps; ++i) s = serial_fn();
    t.serial_ms = (omp_get_wtime() - t0) * 1000.0 / reps;

    t0 = omp_get_wtime();
    for (int i = 0; i < reps; ++i) p = parallel_fn();
    t.parallel_ms = (omp_get_wtime() - t0) * 1000.0 / reps;
    return t;
}

double vec_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void report(const std::string& name, const Timing& t) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   max|diff| %g\n", name.c_str(),
                t.serial_ms, t.parallel_ms,
                t.parallel_ms > 0 ? t.serial_ms / t.parallel_ms : 0.0, t.max_abs_diff);
}

} // namespace

int main() {
    std::printf("threads: %d\n", max_threads());
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    const PatchGeometry g(16, 1, 224, 224, 2, 16, 16);
    rng::SplitMix64 gen(1);
    DetectionSet dets(g.frames);
    for (int t = 0; t < g.frames; ++t) {
        for (int i = 0; i < 4; ++i) {
            dets.add(t, BoundingBox(gen.uniform01() * g.width, gen.uniform01() * g.height,
                                    10 + gen.uniform01() * 40, 10 + gen.uniform01() * 40));
        }
    }
    const SigmaPolicy sigma = SigmaPolicy::box_scaled(1.0 / 6.0);

    report("video_heatmap 224x224x16",
           run(
               3, [&] { return serial::video_heatmap(dets, g, sigma); },
               [&] { return video_heatmap(dets, g, sigma); },
               [](const PixelHeatmap& a, const PixelHeatmap& b) {
                   return vec_diff(a.values, b.values);
               }));

    const PixelHeatmap heat = video_heatmap(dets, g, sigma);
    report("patch_objectness 14x14",
           run(
               200, [&] { return serial::patch_objectness(heat, g); },
               [&] { return patch_objectness(heat, g); },
               [](const ObjectnessMap& a, const ObjectnessMap& b) {
                   return vec_diff(a.spatial, b.spatial);
               }));

    std::vector<double> data(g.value_count());
    for (double& v : data) v = gen.uniform01();
    const VideoTensor video(g, data);
    std::vector<double> pred(static_cast<std::size_t>(g.token_count()) * g.patch_elems());
    for (double& v : pred) v = gen.uniform01();
    const Reconstruction recon(g, pred);
    const MaskSpec mask = baseline_mask(g, MaskParams(0.7, 3, MaskStrategy::tube));
    const TokenScores scores = token_scores(patch_objectness(heat, g));
    const LossWeights weights = loss_weights(scores, mask, true);

    report("weighted_mse N=1568",
           run(
               50, [&] { return serial::weighted_mse(video, recon, weights); },
               [&] { return weighted_mse(video, recon, weights); },
               [](double a, double b) { return std::abs(a - b); }));

    report("weighted_mse_gradient",
           run(
               20,
               [&] { return serial::weighted_mse_gradient(video, recon, weights); },
               [&] { return weighted_mse_gradient(video, recon, weights); },
               [](const std::vector<double>& a, const std::vector<double>& b) {
                   return vec_diff(a, b);
               }));

    const ToyModel model = ToyModel::random_init(g, 32, 9);
    report("toymae forward D=32",
           run(
               5, [&] { return serial::forward(model, video, mask); },
               [&] { return forward(model, video, mask); },
               [](const Reconstruction& a, const Reconstruction& b) {
                   return vec_diff(a.values, b.values);
               }));

    report("toymae backward D=32",
           run(
               5, [&] { return serial::backward(model, video, mask, weights); },
               [&] { return backward(model, video, mask, weights); },
               [](const ToyGradients& a, const ToyGradients& b) {
                   double m = vec_diff(a.encoder_w, b.encoder_w);
                   m = std::max(m, vec_diff(a.decoder_w, b.decoder_w));
                   m = std::max(m, vec_diff(a.decoder_b, b.decoder_b));
                   m = std::max(m, vec_diff(a.mask_token, b.mask_token));
                   return m;
               }));

    return 0;
}
