#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "soar/heatmap.hpp"
#include "soar/io.hpp"
#include "soar/loss.hpp"
#include "soar/masking.hpp"
#include "soar/objectness.hpp"
#include "soar/parallel.hpp"
#include "soar/rng.hpp"
#include "soar/synth.hpp"
#include "soar/toymae.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace soar;

namespace {

struct GeometryFlags {
    int frames = 16;
    int channels = 1;
    int height = 224;
    int width = 224;
    int patch_t = 2;
    int patch_h = 16;
    int patch_w = 16;

    void attach(CLI::App* cmd) {
        cmd->add_option("--frames", frames, "video frames (T)");
        cmd->add_option("--channels", channels, "channels (C)");
        cmd->add_option("--height", height, "frame height in pixels");
        cmd->add_option("--width", width, "frame width in pixels");
        cmd->add_option("--patch-t", patch_t, "frames per patch");
        cmd->add_option("--patch-h", patch_h, "patch height in pixels");
        cmd->add_option("--patch-w", patch_w, "patch width in pixels");
    }

    PatchGeometry build() const {
        return PatchGeometry(frames, channels, height, width, patch_t, patch_h, patch_w);
    }
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

io::Tensor video_to_tensor(const VideoTensor& video) {
    const PatchGeometry& g = video.geometry;
    io::Tensor t;
    t.dims = {static_cast<std::uint32_t>(g.frames), static_cast<std::uint32_t>(g.channels),
              static_cast<std::uint32_t>(g.height), static_cast<std::uint32_t>(g.width)};
    t.values = video.data;
    return t;
}

SigmaPolicy sigma_from_flags(double sigma_scale, double sigma_fixed) {
    if (sigma_fixed > 0.0) return SigmaPolicy::fixed(sigma_fixed);
    return SigmaPolicy::box_scaled(sigma_scale);
}

void write_object_tokens(const std::string& path,
                         const std::vector<std::vector<int>>& per_slot) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    json header;
    header["format"] = "soar-object-tokens";
    header["version"] = 1;
    out << header.dump() << '\n';
    for (std::size_t slot = 0; slot < per_slot.size(); ++slot) {
        json line;
        line["slot"] = slot;
        line["tokens"] = per_slot[slot];
        out << line.dump() << '\n';
    }
}

// ---- synth ----------------------------------------------------------

struct SynthFlags {
    GeometryFlags geom;
    std::uint64_t seed = 0;
    double coverage = 0.05;
    int object_size = 0;
    int objects = 1;
    std::string motion = "static";
    double drift_x = 1.0;
    double drift_y = 0.0;
    double noise_amp = 0.1;
    double signal_amp = 1.0;
    std::uint64_t texture_seed = 0;
    double jitter_center = 0.0;
    double jitter_size = 0.0;
    double dropout = 0.0;
    std::string out_dir;
};

int run_synth(const SynthFlags& f) {
    SynthConfig cfg;
    cfg.geometry = f.geom.build();
    cfg.object_count = f.objects;
    cfg.object_size = f.object_size;
    cfg.coverage = f.coverage;
    if (f.motion == "static") {
        cfg.motion = MotionKind::static_object;
    } else if (f.motion == "drift") {
        cfg.motion = MotionKind::linear_drift;
    } else {
        throw ParameterError("motion must be 'static' or 'drift'");
    }
    cfg.drift_x = f.drift_x;
    cfg.drift_y = f.drift_y;
    cfg.noise_amplitude = f.noise_amp;
    cfg.signal_amplitude = f.signal_amp;
    cfg.texture_seed = f.texture_seed;
    cfg.jitter_center = f.jitter_center;
    cfg.jitter_size = f.jitter_size;
    cfg.dropout = f.dropout;

    const SynthResult r = generate(cfg, f.seed);
    fs::create_directories(f.out_dir);
    io::write_tensor((fs::path(f.out_dir) / "video.soart").string(),
                     video_to_tensor(r.video));
    io::write_detections((fs::path(f.out_dir) / "detections.jsonl").string(),
                         r.detections);
    write_object_tokens((fs::path(f.out_dir) / "object_tokens.jsonl").string(),
                        r.object_tokens_per_slot);
    return 0;
}

// ---- heatmap --------------------------------------------------------

struct HeatmapFlags {
    std::string video;
    std::string dets;
    std::string out;
    std::string pgm;
    double sigma_scale = 1.0 / 6.0;
    double sigma_fixed = 0.0;
    bool truncate = false;
};

int run_heatmap(const HeatmapFlags& f) {
    const io::Tensor vt = io::read_tensor(f.video);
    if (vt.dims.size() != 4) throw FormatError("video tensor must have rank 4 (T,C,H,W)");
    const PatchGeometry g(static_cast<int>(vt.dims[0]), static_cast<int>(vt.dims[1]),
                          static_cast<int>(vt.dims[2]), static_cast<int>(vt.dims[3]), 1, 1,
                          1);
    const DetectionSet dets = io::read_detections(f.dets, g.frames);
    const PixelHeatmap map =
        video_heatmap(dets, g, sigma_from_flags(f.sigma_scale, f.sigma_fixed), f.truncate);

    io::Tensor out;
    out.dims = {static_cast<std::uint32_t>(map.height),
                static_cast<std::uint32_t>(map.width)};
    out.values = map.values;
    io::write_tensor(f.out, out);
    const std::string pgm_path = f.pgm.empty() ? f.out + ".pgm" : f.pgm;
    io::write_pgm(pgm_path, map.width, map.height, map.values);
    return 0;
}

// ---- objectness -----------------------------------------------------

struct ObjectnessFlags {
    std::string heatmap;
    std::string out;
    std::string pgm;
    int patch_h = 16;
    int patch_w = 16;
};

int run_objectness(const ObjectnessFlags& f) {
    const io::Tensor ht = io::read_tensor(f.heatmap);
    if (ht.dims.size() != 2) throw FormatError("heatmap tensor must have rank 2 (H,W)");
    PixelHeatmap map;
    map.height = static_cast<int>(ht.dims[0]);
    map.width = static_cast<int>(ht.dims[1]);
    map.values = ht.values;
    const PatchGeometry g(1, 1, map.height, map.width, 1, f.patch_h, f.patch_w);
    const ObjectnessMap obj = patch_objectness(map, g);

    io::Tensor out;
    out.dims = {static_cast<std::uint32_t>(g.patch_rows()),
                static_cast<std::uint32_t>(g.patch_cols())};
    out.values = obj.spatial;
    io::write_tensor(f.out, out);
    if (!f.pgm.empty()) {
        io::write_pgm(f.pgm, g.patch_cols(), g.patch_rows(), obj.spatial);
    }
    return 0;
}

// ---- mask -----------------------------------------------------------

struct MaskFlags {
    GeometryFlags geom;
    std::string strategy = "object-aware";
    double rho = 0.7;
    double x = 0.5;
    std::uint64_t seed = 0;
    std::string scores;
    std::string out;
};

ObjectnessMap load_spatial_scores(const std::string& path, const PatchGeometry& g) {
    const io::Tensor st = io::read_tensor(path);
    if (st.dims.size() != 2 || static_cast<int>(st.dims[0]) != g.patch_rows() ||
        static_cast<int>(st.dims[1]) != g.patch_cols()) {
        throw ShapeError("objectness tensor does not match the patch grid");
    }
    ObjectnessMap map;
    map.geometry = g;
    map.spatial = st.values;
    return map;
}

int run_mask(const MaskFlags& f) {
    const PatchGeometry g = f.geom.build();
    const MaskStrategy strategy = strategy_from_name(f.strategy);
    const MaskParams params(f.rho, f.seed, strategy, f.x);

    MaskSpec mask = [&]() {
        switch (strategy) {
            case MaskStrategy::object_aware: {
                if (f.scores.empty()) {
                    throw ParameterError("object-aware masking needs --scores");
                }
                return object_aware_mask(load_spatial_scores(f.scores, g), params);
            }
            case MaskStrategy::ratio_x: {
                if (f.scores.empty()) throw ParameterError("ratio-x masking needs --scores");
                const TokenScores ts = token_scores(load_spatial_scores(f.scores, g));
                return ratio_x_mask(ts, visible_from_ratio(f.rho, g.token_count()), f.x,
                                    f.seed);
            }
            case MaskStrategy::leaky_3d: {
                if (f.scores.empty()) throw ParameterError("leaky-3d masking needs --scores");
                const TokenScores ts = token_scores(load_spatial_scores(f.scores, g));
                return leaky_3d_mask(ts, params);
            }
            default:
                return baseline_mask(g, params);
        }
    }();

    io::write_mask(f.out, mask);
    return 0;
}

// ---- weights --------------------------------------------------------

struct WeightsFlags {
    std::string scores;
    std::string mask;
    std::string out;
    bool no_mu = false;
};

int run_weights(const WeightsFlags& f) {
    const MaskSpec mask = io::read_mask(f.mask);
    const ObjectnessMap map = load_spatial_scores(f.scores, mask.geometry);
    const LossWeights w = loss_weights(token_scores(map), mask, !f.no_mu);
    io::write_weights_jsonl(f.out, w);
    return 0;
}

// ---- train-toy ------------------------------------------------------

struct TrainToyFlags {
    std::string config;
    std::string out_dir = ".";
};

SynthConfig synth_from_json(const json& j) {
    SynthConfig cfg;
    cfg.geometry = PatchGeometry(j.at("frames").get<int>(), j.at("channels").get<int>(),
                                 j.at("height").get<int>(), j.at("width").get<int>(),
                                 j.at("patch_t").get<int>(), j.at("patch_h").get<int>(),
                                 j.at("patch_w").get<int>());
    cfg.object_count = j.value("objects", 1);
    cfg.object_size = j.value("object_size", 0);
    cfg.coverage = j.value("coverage", 0.05);
    const std::string motion = j.value("motion", "static");
    if (motion == "drift") {
        cfg.motion = MotionKind::linear_drift;
    } else if (motion == "static") {
        cfg.motion = MotionKind::static_object;
    } else {
        throw ParameterError("motion must be 'static' or 'drift'");
    }
    cfg.drift_x = j.value("drift_x", 1.0);
    cfg.drift_y = j.value("drift_y", 0.0);
    cfg.noise_amplitude = j.value("noise_amp", 0.1);
    cfg.signal_amplitude = j.value("signal_amp", 1.0);
    cfg.texture_seed = j.value("texture_seed", 0);
    return cfg;
}

int run_train_toy(const TrainToyFlags& f) {
    std::ifstream in(f.config);
    if (!in) throw FormatError("cannot open config: " + f.config);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad config JSON: ") + e.what());
    }

    const SynthConfig synth_cfg = synth_from_json(cfg.at("synth"));
    const std::uint64_t synth_seed = cfg.at("synth").at("seed").get<std::uint64_t>();
    const int sample_count = cfg.at("synth").value("count", 2);
    const double sigma_scale = cfg.at("synth").value("sigma_scale", 1.0 / 6.0);

    std::vector<TrainSample> dataset;
    dataset.reserve(static_cast<std::size_t>(sample_count));
    for (int i = 0; i < sample_count; ++i) {
        SynthResult r = generate(synth_cfg, synth_seed + static_cast<std::uint64_t>(i));
        const PixelHeatmap heat = video_heatmap(r.detections, synth_cfg.geometry,
                                                SigmaPolicy::box_scaled(sigma_scale));
        ObjectnessMap obj = patch_objectness(heat, synth_cfg.geometry);
        dataset.push_back(TrainSample{std::move(r.video), std::move(obj),
                                      std::move(r.object_tokens)});
    }

    const json& tj = cfg.at("train");
    TrainConfig train_cfg;
    train_cfg.steps = tj.at("steps").get<int>();
    train_cfg.learning_rate = tj.at("learning_rate").get<double>();
    train_cfg.seed = tj.at("seed").get<std::uint64_t>();
    train_cfg.batch_size = tj.value("batch_size", 1);
    train_cfg.mask = MaskParams(tj.value("rho", 0.7), 0,
                                strategy_from_name(tj.value("strategy", "object-aware")),
                                tj.value("x", 0.5));
    train_cfg.use_mu = tj.value("use_mu", true);
    train_cfg.objectness_weights = tj.value("objectness_weights", true);

    const int dim = cfg.at("model").at("dim").get<int>();
    const std::uint64_t init_seed = cfg.at("model").value("init_seed", train_cfg.seed);

    ToyModel model = ToyModel::random_init(synth_cfg.geometry, dim, init_seed);
    const TrainTrace trace = train(model, dataset, train_cfg);

    fs::create_directories(f.out_dir);
    {
        std::ofstream out(fs::path(f.out_dir) / "trace.csv", std::ios::trunc);
        if (!out) throw FormatError("cannot write trace.csv");
        out << "step,total_loss,object_mse,background_mse\n";
        for (const TraceRow& row : trace.rows) {
            out << row.step << ',' << fmt_double(row.total_loss) << ','
                << fmt_double(row.object_mse) << ',' << fmt_double(row.background_mse)
                << '\n';
        }
    }
    {
        const int p = synth_cfg.geometry.patch_elems();
        const auto u32 = [](int v) { return static_cast<std::uint32_t>(v); };
        std::vector<io::Tensor> ck;
        ck.push_back({{u32(dim), u32(p)}, model.embed_w});
        ck.push_back({{u32(dim)}, model.embed_b});
        ck.push_back({{u32(dim), u32(dim)}, model.encoder_w});
        ck.push_back({{u32(dim)}, model.mask_token});
        ck.push_back({{u32(p), u32(dim)}, model.decoder_w});
        ck.push_back({{u32(p)}, model.decoder_b});
        io::write_tensors((fs::path(f.out_dir) / "checkpoint.soart").string(), ck);
    }
    return 0;
}

// ---- bench-masking --------------------------------------------------

struct BenchFlags {
    int trials = 100000;
    std::uint64_t seed = 0;
    double rho = 0.75;
    int rows = 4;
    int cols = 4;
    int slots = 1;
    int object_cells = 2;
};

int run_bench_masking(const BenchFlags& f) {
    if (f.trials < 1) throw ParameterError("trials must be positive");
    const PatchGeometry g(f.slots, 1, f.rows, f.cols, 1, 1, 1);
    const int ns = g.spatial_count();
    if (f.object_cells < 1 || f.object_cells > ns) {
        throw ParameterError("object cell count must lie in [1, N_s]");
    }

    // A centered run of high-score cells; background scores are uniform.
    std::vector<double> spatial(static_cast<std::size_t>(ns), 1.0);
    std::vector<std::uint8_t> is_object(static_cast<std::size_t>(ns), 0);
    const int center = (f.rows / 2) * f.cols + f.cols / 2;
    const int start = std::clamp(center - f.object_cells / 2, 0, ns - f.object_cells);
    for (int i = 0; i < f.object_cells; ++i) {
        const int cell = start + i;
        spatial[static_cast<std::size_t>(cell)] = 10.0 + i;
        is_object[static_cast<std::size_t>(cell)] = 1;
    }
    ObjectnessMap scores;
    scores.geometry = g;
    scores.spatial = spatial;

    std::vector<std::uint8_t> object_token(static_cast<std::size_t>(g.token_count()), 0);
    for (int slot = 0; slot < g.temporal_slots(); ++slot) {
        for (int c = 0; c < ns; ++c) {
            object_token[static_cast<std::size_t>(slot * ns + c)] = is_object[c];
        }
    }
    int object_token_count = 0;
    for (std::uint8_t v : object_token) object_token_count += v;

    std::printf("strategy,trials,visible_count,p_ge1_object_visible,mean_visible_object_tokens\n");
    for (MaskStrategy strategy : {MaskStrategy::object_aware, MaskStrategy::random,
                                  MaskStrategy::tube, MaskStrategy::block}) {
        const auto draw = [&](int trial) {
            const std::uint64_t trial_seed =
                rng::derive({f.seed, static_cast<std::uint64_t>(trial)});
            const MaskParams params(f.rho, trial_seed, strategy);
            return strategy == MaskStrategy::object_aware
                       ? object_aware_mask(scores, params)
                       : baseline_mask(g, params);
        };
        const int visible_count = draw(0).visible_count; // cardinality is deterministic

        long long ge1 = 0;
        long long total_visible_objects = 0;
#pragma omp parallel for num_threads(max_threads()) schedule(static) \
    reduction(+ : ge1, total_visible_objects)
        for (int trial = 0; trial < f.trials; ++trial) {
            const MaskSpec mask = draw(trial);
            int hits = 0;
            for (int i = 0; i < g.token_count(); ++i) {
                if (object_token[static_cast<std::size_t>(i)] && mask.visible[i]) ++hits;
            }
            ge1 += hits > 0 ? 1 : 0;
            total_visible_objects += hits;
        }

        std::printf("%s,%d,%d,%s,%s\n", strategy_name(strategy), f.trials, visible_count,
                    fmt_double(static_cast<double>(ge1) / f.trials).c_str(),
                    fmt_double(static_cast<double>(total_visible_objects) / f.trials)
                        .c_str());
    }
    (void)object_token_count;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"object-aware masking and loss signals for video masked autoencoding"};
    app.require_subcommand(1);

    SynthFlags synth_flags;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic long-tailed video");
    synth_flags.geom.frames = 16;
    synth_flags.geom.height = 224;
    synth_flags.geom.width = 224;
    synth_cmd->add_option("--out", synth_flags.out_dir, "output directory")->required();
    synth_cmd->add_option("--seed", synth_flags.seed, "generation seed")->required();
    synth_flags.geom.attach(synth_cmd);
    synth_cmd->add_option("--coverage", synth_flags.coverage,
                          "object area as a fraction of the frame");
    synth_cmd->add_option("--object-size", synth_flags.object_size,
                          "object side in pixels (0 = derive from coverage)");
    synth_cmd->add_option("--objects", synth_flags.objects, "object count");
    synth_cmd->add_option("--motion", synth_flags.motion, "static or drift");
    synth_cmd->add_option("--dx", synth_flags.drift_x, "drift per frame, x");
    synth_cmd->add_option("--dy", synth_flags.drift_y, "drift per frame, y");
    synth_cmd->add_option("--noise-amp", synth_flags.noise_amp, "background noise amplitude");
    synth_cmd->add_option("--signal-amp", synth_flags.signal_amp, "object signal amplitude");
    synth_cmd->add_option("--texture-seed", synth_flags.texture_seed, "texture phase seed");
    synth_cmd->add_option("--jitter-center", synth_flags.jitter_center,
                          "detection center jitter in pixels");
    synth_cmd->add_option("--jitter-size", synth_flags.jitter_size,
                          "relative detection size jitter");
    synth_cmd->add_option("--dropout", synth_flags.dropout,
                          "per-frame detection dropout probability");

    HeatmapFlags heatmap_flags;
    CLI::App* heatmap_cmd =
        app.add_subcommand("heatmap", "detections to a pixel objectness heatmap");
    heatmap_cmd->add_option("--video", heatmap_flags.video, "video tensor")->required();
    heatmap_cmd->add_option("--dets", heatmap_flags.dets, "detection JSONL")->required();
    heatmap_cmd->add_option("--out", heatmap_flags.out, "output tensor")->required();
    heatmap_cmd->add_option("--pgm", heatmap_flags.pgm, "output PGM (default <out>.pgm)");
    heatmap_cmd->add_option("--sigma-scale", heatmap_flags.sigma_scale,
                            "sigma as a fraction of min box side");
    heatmap_cmd->add_option("--sigma", heatmap_flags.sigma_fixed,
                            "fixed sigma in pixels (overrides --sigma-scale)");
    heatmap_cmd->add_flag("--truncate", heatmap_flags.truncate,
                          "drop Gaussian tails beyond 3 sigma");

    ObjectnessFlags obj_flags;
    CLI::App* obj_cmd =
        app.add_subcommand("objectness", "aggregate a heatmap into patch scores");
    obj_cmd->add_option("--heatmap", obj_flags.heatmap, "heatmap tensor")->required();
    obj_cmd->add_option("--out", obj_flags.out, "output tensor")->required();
    obj_cmd->add_option("--pgm", obj_flags.pgm, "optional PGM visualization");
    obj_cmd->add_option("--patch-h", obj_flags.patch_h, "patch height in pixels");
    obj_cmd->add_option("--patch-w", obj_flags.patch_w, "patch width in pixels");

    MaskFlags mask_flags;
    CLI::App* mask_cmd = app.add_subcommand("mask", "draw a visibility mask");
    mask_flags.geom.attach(mask_cmd);
    mask_cmd->add_option("--strategy", mask_flags.strategy,
                         "object-aware | ratio-x | leaky-3d | random | tube | block");
    mask_cmd->add_option("--rho", mask_flags.rho, "mask ratio in [0,1)");
    mask_cmd->add_option("--x", mask_flags.x, "foreground fraction for ratio-x");
    mask_cmd->add_option("--seed", mask_flags.seed, "mask seed")->required();
    mask_cmd->add_option("--scores", mask_flags.scores, "objectness tensor");
    mask_cmd->add_option("--out", mask_flags.out, "output mask file")->required();

    WeightsFlags weights_flags;
    CLI::App* weights_cmd =
        app.add_subcommand("weights", "reconstruction loss weights for a mask");
    weights_cmd->add_option("--scores", weights_flags.scores, "objectness tensor")
        ->required();
    weights_cmd->add_option("--mask", weights_flags.mask, "mask file")->required();
    weights_cmd->add_option("--out", weights_flags.out, "output JSONL")->required();
    weights_cmd->add_flag("--no-mu", weights_flags.no_mu,
                          "drop the +mean term before normalizing");

    TrainToyFlags train_flags;
    CLI::App* train_cmd =
        app.add_subcommand("train-toy", "train the toy masked autoencoder");
    train_cmd->add_option("--config", train_flags.config, "JSON config")->required();
    train_cmd->add_option("--out-dir", train_flags.out_dir, "output directory");

    BenchFlags bench_flags;
    CLI::App* bench_cmd = app.add_subcommand(
        "bench-masking", "object-token visibility statistics per strategy");
    bench_cmd->add_option("--trials", bench_flags.trials, "Monte Carlo trials");
    bench_cmd->add_option("--seed", bench_flags.seed, "base seed")->required();
    bench_cmd->add_option("--rho", bench_flags.rho, "mask ratio");
    bench_cmd->add_option("--rows", bench_flags.rows, "spatial rows");
    bench_cmd->add_option("--cols", bench_flags.cols, "spatial cols");
    bench_cmd->add_option("--slots", bench_flags.slots, "temporal slots");
    bench_cmd->add_option("--object-cells", bench_flags.object_cells,
                          "number of high-score cells");

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) return run_synth(synth_flags);
        if (heatmap_cmd->parsed()) return run_heatmap(heatmap_flags);
        if (obj_cmd->parsed()) return run_objectness(obj_flags);
        if (mask_cmd->parsed()) return run_mask(mask_flags);
        if (weights_cmd->parsed()) return run_weights(weights_flags);
        if (train_cmd->parsed()) return run_train_toy(train_flags);
        if (bench_cmd->parsed()) return run_bench_masking(bench_flags);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
