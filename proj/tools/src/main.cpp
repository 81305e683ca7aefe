// pointseg command-line tool: sampling benchmarks, toy training, inference,
// evaluation and inspection dumps over the pointseg core library. Every
// subcommand writes a JSON manifest next to its outputs so results can be
// traced back to the exact invocation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pointseg/checkpoint.hpp"
#include "pointseg/cloud.hpp"
#include "pointseg/config.hpp"
#include "pointseg/errors.hpp"
#include "pointseg/kitti_io.hpp"
#include "pointseg/manifest.hpp"
#include "pointseg/metrics.hpp"
#include "pointseg/network.hpp"
#include "pointseg/ply_io.hpp"
#include "pointseg/rng.hpp"
#include "pointseg/samplers.hpp"

namespace ps = pointseg;
namespace fs = std::filesystem;

namespace {

// sysexits-style codes, documented in the README.
constexpr int kOk = 0;
constexpr int kTimeoutRows = 2;  // bench finished but some cells hit the budget
constexpr int kUsage = 64;
constexpr int kBadData = 65;
constexpr int kNoInput = 66;
constexpr int kFailure = 70;

ps::RunManifest begin_manifest(const std::string& command, const std::vector<std::string>& argv) {
    ps::RunManifest m;
    m.command = command;
    m.arguments = argv;
    m.started_at = ps::utc_timestamp();
    return m;
}

void finish_manifest(ps::RunManifest& m, const std::string& path) {
    m.finished_at = ps::utc_timestamp();
    ps::write_manifest(m, path);
}

std::string default_manifest_path(const std::string& primary_output) {
    return primary_output + ".manifest.json";
}

std::string labels_sibling(const std::string& cloud_path) {
    return fs::path(cloud_path).replace_extension(".labels").string();
}

ps::PointCloud load_labeled_ply(const std::string& path) {
    ps::PointCloud cloud = ps::read_ply_file(path);
    std::vector<std::int32_t> labels = ps::read_kitti_label_file(labels_sibling(path));
    if (labels.size() != cloud.size()) {
        throw ps::DataError(path + ": cloud has " + std::to_string(cloud.size()) +
                            " points but its label file has " + std::to_string(labels.size()));
    }
    cloud.labels = std::move(labels);
    return cloud;
}

// Scenes of one family share the layout and differ only in the point draw.
std::vector<ps::PointCloud> make_scene_family(std::size_t count, ps::SceneSpec base,
                                              std::uint64_t seed, std::uint64_t stream) {
    std::vector<ps::PointCloud> scenes;
    scenes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        base.seed = ps::derive_seed(seed, stream + i);
        scenes.push_back(ps::generate_scene(base));
    }
    return scenes;
}

ps::NetworkConfig load_config_or_exit(const std::string& path) {
    try {
        return ps::read_config_file(path);
    } catch (const ps::Error& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        std::exit(kNoInput);
    }
}

struct LoadedNetwork {
    ps::NetworkConfig cfg;
    ps::Network net;
};

LoadedNetwork load_network(const std::string& checkpoint_path) {
    const ps::Checkpoint ckpt = ps::read_checkpoint_file(checkpoint_path);
    ps::NetworkConfig cfg = ps::parse_config(ckpt.config_text);
    ps::Network net = ps::build_network(cfg);
    ps::load_into(ckpt, net.params());
    return {std::move(cfg), std::move(net)};
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
    std::vector<std::size_t> sizes;
    std::vector<std::string> methods;
    std::string out;
    std::string manifest;
    std::uint64_t seed = 0;
    std::size_t steps = 5;
    double ratio = 0.25;
    double time_budget = 300.0;
    std::size_t memory_budget = std::size_t{2} << 30;
    double extent = 100.0;
    std::size_t fps_start = 0;
    std::size_t idis_t = 16;
    bool idis_invert = false;
    double crs_tau = 1.0;
};

int cmd_bench(const BenchArgs& args, const std::vector<std::string>& argv) {
    std::vector<ps::SampleMethod> methods;
    for (const std::string& name : args.methods) {
        const std::optional<ps::SampleMethod> method = ps::sample_method_from_name(name);
        if (!method) {
            std::cerr << "pointseg bench: unknown method '" << name
                      << "' (expected rs, fps, idis or crs)\n";
            return kUsage;
        }
        methods.push_back(*method);
    }

    ps::DecimationPlan plan;
    plan.steps = args.steps;
    plan.ratio = args.ratio;
    ps::BenchmarkOptions options;
    options.time_budget_s = args.time_budget;
    options.memory_budget_bytes = args.memory_budget;
    options.seed = args.seed;
    options.extent = args.extent;
    options.fps_start = args.fps_start;
    options.idis_t = args.idis_t;
    options.idis_invert = args.idis_invert;
    options.crs_tau = args.crs_tau;

    ps::RunManifest manifest = begin_manifest("bench", argv);
    manifest.seed = args.seed;

    const std::vector<ps::BenchmarkRow> rows =
        ps::run_decimation_benchmark(args.sizes, plan, methods, options);

    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw ps::IoError("cannot open " + args.out + " for writing");
    out << ps::benchmark_csv(rows);
    out.flush();
    if (!out) throw ps::IoError("failed writing " + args.out);

    std::size_t timeouts = 0;
    for (const ps::BenchmarkRow& row : rows) {
        if (row.status != "ok") ++timeouts;
    }
    manifest.outputs.push_back(args.out);
    manifest.extra["rows"] = std::to_string(rows.size());
    manifest.extra["timeout_rows"] = std::to_string(timeouts);
    finish_manifest(manifest, args.manifest.empty() ? default_manifest_path(args.out)
                                                    : args.manifest);

    std::cout << "wrote " << rows.size() << " rows to " << args.out;
    if (timeouts) std::cout << " (" << timeouts << " timed out)";
    std::cout << "\n";
    return timeouts ? kTimeoutRows : kOk;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::string out;
    std::string config;
    std::string report;
    std::string manifest;
    std::size_t epochs = 50;
    double lr = 0.01;
    double lr_decay = 0.95;
    bool weight_classes = false;
    std::size_t scenes = 8;
    std::size_t points = 1024;
    double extent = 8.0;
    double noise = 0.05;
    std::vector<std::string> data;
    std::size_t crop = 0;
    std::int64_t seed = -1;  // negative keeps the config seed
};

std::vector<ps::PointCloud> gather_training_scenes(const TrainArgs& args,
                                                   const ps::NetworkConfig& cfg) {
    std::vector<ps::PointCloud> scenes;
    if (!args.data.empty()) {
        for (const std::string& path : args.data) scenes.push_back(load_labeled_ply(path));
    } else {
        ps::SceneSpec base;
        base.n_points = args.points;
        base.n_class = static_cast<std::int32_t>(cfg.n_class);
        base.extent = args.extent;
        base.noise_sigma = args.noise;
        scenes = make_scene_family(args.scenes, base, cfg.seed, 0x1000);
    }
    if (args.crop > 0) {
        for (std::size_t i = 0; i < scenes.size(); ++i) {
            scenes[i] = ps::uniform_crop(scenes[i], args.crop, ps::derive_seed(cfg.seed, 0xc0 + i));
        }
    }
    return scenes;
}

int cmd_train(const TrainArgs& args, const std::vector<std::string>& argv) {
    ps::NetworkConfig cfg =
        args.config.empty() ? ps::NetworkConfig{} : load_config_or_exit(args.config);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    cfg.validate();

    ps::RunManifest manifest = begin_manifest("train", argv);
    manifest.seed = cfg.seed;
    manifest.config_text = ps::serialize_config(cfg);

    const std::vector<ps::PointCloud> scenes = gather_training_scenes(args, cfg);
    ps::Network net = ps::build_network(cfg);
    ps::AdamState adam;
    adam.lr = args.lr;
    ps::TrainOptions options;
    options.epochs = args.epochs;
    options.lr_decay = args.lr_decay;
    options.weight_classes = args.weight_classes;

    ps::TrainReport report;
    try {
        report = ps::train(net, scenes, options, adam);
    } catch (const ps::OptimizationError& e) {
        std::cerr << "pointseg train: " << e.what() << "\n";
        return kFailure;
    }

    ps::write_checkpoint_file(args.out, ps::serialize_config(cfg), net.params());
    const std::string report_path = args.report.empty() ? args.out + ".jsonl" : args.report;
    {
        std::ofstream rep(report_path, std::ios::binary);
        if (!rep) throw ps::IoError("cannot open " + report_path + " for writing");
        char line[160];
        for (const ps::EpochStats& e : report.epochs) {
            std::snprintf(line, sizeof(line),
                          "{\"epoch\":%zu,\"loss\":%.9g,\"lr\":%.9g,\"miou\":%.9g}\n", e.epoch,
                          e.mean_loss, e.lr, e.train_miou);
            rep << line;
        }
        rep.flush();
        if (!rep) throw ps::IoError("failed writing " + report_path);
    }

    manifest.outputs.push_back(args.out);
    manifest.outputs.push_back(report_path);
    manifest.extra["scenes"] = std::to_string(scenes.size());
    manifest.extra["epochs"] = std::to_string(args.epochs);
    manifest.extra["parameters"] = std::to_string(net.parameter_count());
    if (!report.epochs.empty()) {
        const ps::EpochStats& last = report.epochs.back();
        manifest.extra["final_loss"] = std::to_string(last.mean_loss);
        manifest.extra["final_train_miou"] = std::to_string(last.train_miou);
    }
    finish_manifest(manifest, args.manifest.empty() ? default_manifest_path(args.out)
                                                    : args.manifest);

    for (const ps::EpochStats& e : report.epochs) {
        std::cout << "epoch " << e.epoch << "  loss " << e.mean_loss << "  lr " << e.lr
                  << "  train mIoU " << e.train_miou << "\n";
    }
    std::cout << "wrote " << args.out << "\n";
    return kOk;
}

// ---------------------------------------------------------------- infer ----

struct InferArgs {
    std::string checkpoint;
    std::string input;
    std::string out;
    std::string manifest;
    std::uint64_t seed = 0;
};

ps::PointCloud load_input_cloud(const std::string& path) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".ply") return ps::read_ply_file(path);
    if (ext == ".bin") return ps::read_kitti_bin_file(path);
    throw ps::ArgumentError("unsupported input format '" + ext + "' (expected .ply or .bin)");
}

int cmd_infer(const InferArgs& args, const std::vector<std::string>& argv) {
    LoadedNetwork loaded = load_network(args.checkpoint);
    const ps::PointCloud cloud = load_input_cloud(args.input);

    const std::size_t expected_attrs = loaded.cfg.d_in - 3;
    if (cloud.attr_width != expected_attrs) {
        std::cerr << "pointseg infer: checkpoint expects d_in=" << loaded.cfg.d_in << " ("
                  << expected_attrs << " attribute channels) but " << args.input << " has "
                  << cloud.attr_width << "\n";
        return kBadData;
    }

    ps::RunManifest manifest = begin_manifest("infer", argv);
    manifest.seed = args.seed;
    manifest.config_text = ps::serialize_config(loaded.cfg);

    const std::vector<std::int32_t> labels = loaded.net.predict(cloud, args.seed);
    if (fs::path(args.out).extension() == ".label") {
        ps::write_kitti_label_file(labels, args.out);
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw ps::IoError("cannot open " + args.out + " for writing");
        for (std::int32_t label : labels) out << label << "\n";
        out.flush();
        if (!out) throw ps::IoError("failed writing " + args.out);
    }

    manifest.outputs.push_back(args.out);
    manifest.extra["points"] = std::to_string(cloud.size());
    finish_manifest(manifest, args.manifest.empty() ? default_manifest_path(args.out)
                                                    : args.manifest);
    std::cout << "labeled " << cloud.size() << " points -> " << args.out << "\n";
    return kOk;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
    std::string checkpoint;
    std::string out = "metrics.json";
    std::string manifest;
    std::vector<std::string> data;
    std::size_t scenes = 4;
    std::size_t points = 1024;
    double extent = 8.0;
    double noise = 0.05;
    std::uint64_t seed = 1000;
};

int cmd_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
    LoadedNetwork loaded = load_network(args.checkpoint);

    std::vector<ps::PointCloud> scenes;
    if (!args.data.empty()) {
        for (const std::string& path : args.data) scenes.push_back(load_labeled_ply(path));
    } else {
        ps::SceneSpec base;
        base.n_points = args.points;
        base.n_class = static_cast<std::int32_t>(loaded.cfg.n_class);
        base.extent = args.extent;
        base.noise_sigma = args.noise;
        scenes = make_scene_family(args.scenes, base, args.seed, 0x2000);
    }

    ps::RunManifest manifest = begin_manifest("eval", argv);
    manifest.seed = args.seed;
    manifest.config_text = ps::serialize_config(loaded.cfg);

    const ps::SegmentationMetrics metrics = ps::evaluate(loaded.net, scenes);

    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw ps::IoError("cannot open " + args.out + " for writing");
    out << ps::metrics_json(metrics);
    out.flush();
    if (!out) throw ps::IoError("failed writing " + args.out);

    manifest.outputs.push_back(args.out);
    manifest.extra["miou"] = std::to_string(metrics.miou);
    manifest.extra["oa"] = std::to_string(metrics.oa);
    manifest.extra["macc"] = std::to_string(metrics.macc);
    finish_manifest(manifest, args.manifest.empty() ? default_manifest_path(args.out)
                                                    : args.manifest);

    std::cout << "mIoU " << metrics.miou << "  OA " << metrics.oa << "  mAcc " << metrics.macc
              << "\n";
    for (std::size_t c = 0; c < metrics.per_class_iou.size(); ++c) {
        std::cout << "  class " << c << " IoU ";
        if (std::isnan(metrics.per_class_iou[c])) {
            std::cout << "n/a (absent)";
        } else {
            std::cout << metrics.per_class_iou[c];
        }
        std::cout << "\n";
    }
    return kOk;
}

// --------------------------------------------------------------- ablate ----

struct AblateArgs {
    std::string id;
    std::string out;
    std::string manifest;
    std::size_t seeds = 1;
    std::uint64_t seed = 0;
    std::size_t epochs = 30;
    std::size_t scenes = 6;
    std::size_t holdout = 2;
    std::size_t points = 512;
    double extent = 8.0;
    double noise = 0.05;
    double lr = 0.01;
};

// The shared toy variant every ablation id modifies: compact two-layer
// network on the 3-class synthetic family, small enough to train in seconds.
ps::NetworkConfig toy_ablation_config() {
    ps::NetworkConfig cfg;
    cfg.d_in = 3;
    cfg.n_class = 3;
    cfg.input_width = 8;
    cfg.encoder_widths = {16, 32};
    cfg.k = 8;
    cfg.head_widths = {16};
    cfg.dropout = 0.5;
    return cfg;
}

bool apply_ablation(ps::NetworkConfig& cfg, const std::string& id) {
    if (id == "full") return true;
    if (id == "no_locse") {
        cfg.use_locse = false;
        return true;
    }
    if (id == "max_pool") {
        cfg.pooling = ps::PoolMode::max;
        return true;
    }
    if (id == "mean_pool") {
        cfg.pooling = ps::PoolMode::mean;
        return true;
    }
    if (id == "sum_pool") {
        cfg.pooling = ps::PoolMode::sum;
        return true;
    }
    if (id == "one_unit") {
        cfg.units = 1;
        return true;
    }
    if (id == "three_units") {
        cfg.units = 3;
        return true;
    }
    if (id == "locse_1") {
        cfg.locse_variant = ps::LocSEVariant::center_only;
        return true;
    }
    if (id == "locse_2") {
        cfg.locse_variant = ps::LocSEVariant::neighbor_only;
        return true;
    }
    if (id == "locse_3") {
        cfg.locse_variant = ps::LocSEVariant::center_neighbor;
        return true;
    }
    if (id == "locse_4") {
        cfg.locse_variant = ps::LocSEVariant::center_neighbor_dist;
        return true;
    }
    if (id == "locse_5") {
        cfg.locse_variant = ps::LocSEVariant::center_neighbor_rel;
        return true;
    }
    return false;
}

int cmd_ablate(const AblateArgs& args, const std::vector<std::string>& argv) {
    ps::NetworkConfig base = toy_ablation_config();
    if (!apply_ablation(base, args.id)) {
        std::cerr << "pointseg ablate: unknown ablation id '" << args.id
                  << "' (expected no_locse, max_pool, mean_pool, sum_pool, one_unit, "
                     "three_units, locse_1..locse_5 or full)\n";
        return kUsage;
    }

    ps::SceneSpec spec;
    spec.n_points = args.points;
    spec.n_class = static_cast<std::int32_t>(base.n_class);
    spec.extent = args.extent;
    spec.noise_sigma = args.noise;
    const std::vector<ps::PointCloud> train_scenes =
        make_scene_family(args.scenes, spec, args.seed, 0x1000);
    const std::vector<ps::PointCloud> holdout_scenes =
        make_scene_family(args.holdout, spec, args.seed, 0x2000);

    ps::RunManifest manifest = begin_manifest("ablate", argv);
    manifest.seed = args.seed;

    std::string mious;
    const bool fresh = !fs::exists(args.out);
    std::ofstream out(args.out, std::ios::binary | std::ios::app);
    if (!out) throw ps::IoError("cannot open " + args.out + " for writing");
    if (fresh) out << "ablation,seed,holdout_miou\n";

    for (std::size_t i = 0; i < args.seeds; ++i) {
        ps::NetworkConfig cfg = base;
        cfg.seed = args.seed + i;
        manifest.config_text = ps::serialize_config(cfg);

        ps::Network net = ps::build_network(cfg);
        ps::AdamState adam;
        adam.lr = args.lr;
        ps::TrainOptions options;
        options.epochs = args.epochs;
        try {
            ps::train(net, train_scenes, options, adam);
        } catch (const ps::OptimizationError& e) {
            std::cerr << "pointseg ablate: " << e.what() << "\n";
            return kFailure;
        }
        const double miou = ps::evaluate(net, holdout_scenes).miou;

        char row[96];
        std::snprintf(row, sizeof(row), "%s,%zu,%.9g\n", args.id.c_str(),
                      static_cast<std::size_t>(cfg.seed), miou);
        out << row;
        if (!mious.empty()) mious += ' ';
        mious += std::to_string(miou);
        std::cout << args.id << " seed " << cfg.seed << " holdout mIoU " << miou << "\n";
    }
    out.flush();
    if (!out) throw ps::IoError("failed writing " + args.out);

    manifest.outputs.push_back(args.out);
    manifest.extra["ablation"] = args.id;
    manifest.extra["seeds"] = std::to_string(args.seeds);
    manifest.extra["holdout_mious"] = mious;
    finish_manifest(manifest, args.manifest.empty() ? args.out + "." + args.id + ".manifest.json"
                                                    : args.manifest);
    return kOk;
}

// ------------------------------------------------------------ dump-attn ----

struct DumpAttnArgs {
    std::string checkpoint;
    std::string outdir;
    std::string manifest;
};

int cmd_dump_attn(const DumpAttnArgs& args, const std::vector<std::string>& argv) {
    LoadedNetwork loaded = load_network(args.checkpoint);
    fs::create_directories(args.outdir);

    ps::RunManifest manifest = begin_manifest("dump-attn", argv);
    manifest.seed = loaded.cfg.seed;
    manifest.config_text = ps::serialize_config(loaded.cfg);

    const std::vector<std::string> paths = loaded.net.dump_attention_matrices(args.outdir);
    for (const std::string& p : paths) {
        manifest.outputs.push_back(p);
        std::cout << "wrote " << p << "\n";
    }
    manifest.extra["layers"] = std::to_string(paths.size());
    finish_manifest(manifest, args.manifest.empty()
                                  ? (fs::path(args.outdir) / "dump-attn.manifest.json").string()
                                  : args.manifest);
    return kOk;
}

// ------------------------------------------------------------ gen-scene ----

struct GenSceneArgs {
    std::string out;
    std::string manifest;
    std::size_t points = 1024;
    std::int32_t classes = 3;
    double extent = 8.0;
    double noise = 0.05;
    std::uint64_t seed = 0;
};

int cmd_gen_scene(const GenSceneArgs& args, const std::vector<std::string>& argv) {
    ps::SceneSpec spec;
    spec.n_points = args.points;
    spec.n_class = args.classes;
    spec.extent = args.extent;
    spec.noise_sigma = args.noise;
    spec.seed = args.seed;

    ps::RunManifest manifest = begin_manifest("gen-scene", argv);
    manifest.seed = args.seed;

    const ps::PointCloud cloud = ps::generate_scene(spec);
    ps::write_ply_file(cloud, args.out);
    const std::string label_path = labels_sibling(args.out);
    ps::write_kitti_label_file(*cloud.labels, label_path);

    manifest.outputs.push_back(args.out);
    manifest.outputs.push_back(label_path);
    manifest.extra["points"] = std::to_string(cloud.size());
    manifest.extra["classes"] = std::to_string(args.classes);
    finish_manifest(manifest, args.manifest.empty() ? default_manifest_path(args.out)
                                                    : args.manifest);
    std::cout << "wrote " << args.out << " and " << label_path << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-cloud semantic segmentation toolkit"};
    app.set_version_flag("--version", std::string(ps::kToolName) + " " + ps::kToolVersion);
    app.require_subcommand(1);
    std::vector<std::string> raw_args(argv + 1, argv + argc);

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "decimation time/memory benchmark");
    bench_cmd->add_option("--sizes", bench.sizes, "cloud sizes, comma separated")
        ->required()
        ->delimiter(',');
    bench_cmd->add_option("--methods", bench.methods, "sampling methods (rs,fps,idis,crs)")
        ->required()
        ->delimiter(',');
    bench_cmd->add_option("--out", bench.out, "output CSV path")->required();
    bench_cmd->add_option("--manifest", bench.manifest, "manifest path");
    bench_cmd->add_option("--seed", bench.seed, "benchmark seed");
    bench_cmd->add_option("--steps", bench.steps, "decimation steps per cell");
    bench_cmd->add_option("--ratio", bench.ratio, "retention ratio per step");
    bench_cmd->add_option("--time-budget", bench.time_budget, "per-cell budget in seconds");
    bench_cmd->add_option("--memory-budget", bench.memory_budget, "per-cell budget in bytes");
    bench_cmd->add_option("--extent", bench.extent, "fixture cube edge length");
    bench_cmd->add_option("--fps-start", bench.fps_start, "farthest-point start index");
    bench_cmd->add_option("--idis-t", bench.idis_t, "density neighbor count");
    bench_cmd->add_flag("--idis-invert", bench.idis_invert, "keep sparse points instead");
    bench_cmd->add_option("--crs-tau", bench.crs_tau, "relaxation temperature");

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "train on synthetic scenes or PLY files");
    train_cmd->add_option("--out", train.out, "checkpoint output path")->required();
    train_cmd->add_option("--config", train.config, "network config file");
    train_cmd->add_option("--report", train.report, "JSONL epoch report path");
    train_cmd->add_option("--manifest", train.manifest, "manifest path");
    train_cmd->add_option("--epochs", train.epochs, "training epochs");
    train_cmd->add_option("--lr", train.lr, "initial Adam learning rate");
    train_cmd->add_option("--lr-decay", train.lr_decay, "per-epoch learning-rate factor");
    train_cmd->add_flag("--weight-classes", train.weight_classes,
                        "inverse-frequency class weights");
    train_cmd->add_option("--scenes", train.scenes, "synthetic scene count");
    train_cmd->add_option("--points", train.points, "points per synthetic scene");
    train_cmd->add_option("--extent", train.extent, "scene cube edge length");
    train_cmd->add_option("--noise", train.noise, "scene jitter sigma");
    train_cmd->add_option("--data", train.data, "labeled PLY files (labels in sibling .labels)");
    train_cmd->add_option("--crop", train.crop, "cap each scene at this many points");
    train_cmd->add_option("--seed", train.seed, "override the config seed");

    InferArgs infer;
    CLI::App* infer_cmd = app.add_subcommand("infer", "label a cloud with a checkpoint");
    infer_cmd->add_option("--checkpoint", infer.checkpoint, "trained checkpoint")->required();
    infer_cmd->add_option("--input", infer.input, "input cloud (.ply or .bin)")->required();
    infer_cmd->add_option("--out", infer.out, "label output (.label binary, else CSV)")
        ->required();
    infer_cmd->add_option("--manifest", infer.manifest, "manifest path");
    infer_cmd->add_option("--seed", infer.seed, "decimation seed");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "segmentation metrics on labeled data");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "trained checkpoint")->required();
    eval_cmd->add_option("--out", eval.out, "metrics JSON path");
    eval_cmd->add_option("--manifest", eval.manifest, "manifest path");
    eval_cmd->add_option("--data", eval.data, "labeled PLY files (labels in sibling .labels)");
    eval_cmd->add_option("--scenes", eval.scenes, "synthetic scene count");
    eval_cmd->add_option("--points", eval.points, "points per synthetic scene");
    eval_cmd->add_option("--extent", eval.extent, "scene cube edge length");
    eval_cmd->add_option("--noise", eval.noise, "scene jitter sigma");
    eval_cmd->add_option("--seed", eval.seed, "scene family seed");

    AblateArgs ablate;
    CLI::App* ablate_cmd = app.add_subcommand("ablate", "train one ablation on the toy task");
    ablate_cmd->add_option("id", ablate.id, "ablation id")->required();
    ablate_cmd->add_option("--out", ablate.out, "comparison CSV (appended)")->required();
    ablate_cmd->add_option("--manifest", ablate.manifest, "manifest path");
    ablate_cmd->add_option("--seeds", ablate.seeds, "number of seeds to train");
    ablate_cmd->add_option("--seed", ablate.seed, "first seed");
    ablate_cmd->add_option("--epochs", ablate.epochs, "training epochs");
    ablate_cmd->add_option("--scenes", ablate.scenes, "training scene count");
    ablate_cmd->add_option("--holdout", ablate.holdout, "held-out scene count");
    ablate_cmd->add_option("--points", ablate.points, "points per scene");
    ablate_cmd->add_option("--extent", ablate.extent, "scene cube edge length");
    ablate_cmd->add_option("--noise", ablate.noise, "scene jitter sigma");
    ablate_cmd->add_option("--lr", ablate.lr, "initial Adam learning rate");

    DumpAttnArgs dump;
    CLI::App* dump_cmd = app.add_subcommand("dump-attn", "write attention weight matrices");
    dump_cmd->add_option("--checkpoint", dump.checkpoint, "trained checkpoint")->required();
    dump_cmd->add_option("--outdir", dump.outdir, "output directory")->required();
    dump_cmd->add_option("--manifest", dump.manifest, "manifest path");

    GenSceneArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-scene", "write a synthetic labeled scene");
    gen_cmd->add_option("--out", gen.out, "output PLY path")->required();
    gen_cmd->add_option("--manifest", gen.manifest, "manifest path");
    gen_cmd->add_option("--points", gen.points, "point count");
    gen_cmd->add_option("--classes", gen.classes, "class count");
    gen_cmd->add_option("--extent", gen.extent, "scene cube edge length");
    gen_cmd->add_option("--noise", gen.noise, "jitter sigma");
    gen_cmd->add_option("--seed", gen.seed, "scene seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (bench_cmd->parsed()) return cmd_bench(bench, raw_args);
        if (train_cmd->parsed()) return cmd_train(train, raw_args);
        if (infer_cmd->parsed()) return cmd_infer(infer, raw_args);
        if (eval_cmd->parsed()) return cmd_eval(eval, raw_args);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate, raw_args);
        if (dump_cmd->parsed()) return cmd_dump_attn(dump, raw_args);
        if (gen_cmd->parsed()) return cmd_gen_scene(gen, raw_args);
    } catch (const ps::OptimizationError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kFailure;
    } catch (const ps::ParseError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kBadData;
    } catch (const ps::FormatError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kBadData;
    } catch (const ps::DataError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kBadData;
    } catch (const ps::IoError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kNoInput;
    } catch (const ps::ArgumentError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kUsage;
    } catch (const ps::ConfigError& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kUsage;
    } catch (const ps::Error& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "pointseg: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
