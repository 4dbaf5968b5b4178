#include "fedmr/runio.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fedmr/checkpoint.hpp"
#include "fedmr/error.hpp"
#include "fedmr/rng.hpp"

namespace fs = std::filesystem;

namespace fedmr {

namespace {

std::string utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::io_error, path.string() + ": cannot open for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) fail(ErrorCode::io_error, path.string() + ": write failed");
}

} // namespace

PreparedData prepare_data(const Config& cfg) {
    PreparedData out;
    if (cfg.data.source == DataConfig::Source::synthetic) {
        SyntheticSpec spec;
        spec.kind = cfg.data.kind;
        spec.samples = static_cast<std::size_t>(cfg.data.samples);
        spec.classes = static_cast<int>(cfg.data.classes);
        spec.features = static_cast<std::size_t>(cfg.data.features);
        spec.noise = cfg.data.noise;
        spec.seed = cfg.experiment.seeds.data;
        spec.draw_nonce = 0;
        out.train = generate_synthetic(spec);
        spec.samples = static_cast<std::size_t>(cfg.data.test_samples);
        spec.draw_nonce = 1;
        out.test = generate_synthetic(spec);
    } else {
        out.train = load_idx(cfg.data.images, cfg.data.labels);
        out.test = load_idx(cfg.data.test_images, cfg.data.test_labels);
        if (out.test.num_classes > out.train.num_classes) {
            fail(ErrorCode::validation_error, "test labels exceed the training label range");
        }
        out.test.num_classes = out.train.num_classes;
    }

    PartitionSpec part = cfg.partition;
    part.num_clients = cfg.experiment.num_clients;
    out.indices = partition_indices(out.train, part, partition_seed(cfg.experiment.seeds.data));
    out.shards = make_shards(out.train, out.indices);
    return out;
}

RunOutput execute_run(const Config& cfg) {
    cfg.validate();
    RunOutput run;
    run.started_utc = utc_now();
    run.resolved_config = cfg.resolved_text();
    run.config_hash = cfg.hash();

    PreparedData data = prepare_data(cfg);
    PartitionSpec part = cfg.partition;
    part.num_clients = cfg.experiment.num_clients;
    run.partition_manifest = partition_manifest_json(part, partition_seed(cfg.experiment.seeds.data), data.indices);

    run.result = run_experiment(cfg.experiment, data.shards, data.test);
    run.finished_utc = utc_now();
    return run;
}

std::string metrics_csv(const RunResult& result) {
    std::string csv = "round,stage,accuracy,loss\n";
    for (const RoundRecord& rec : result.records) {
        if (!rec.evaluated) continue;
        csv += std::to_string(rec.round);
        csv += ',';
        csv += rec.stage;
        csv += ',';
        csv += format_double(rec.accuracy);
        csv += ',';
        csv += format_double(rec.loss);
        csv += '\n';
    }
    return csv;
}

std::string rounds_jsonl(const RunResult& result) {
    std::string out;
    for (const RoundRecord& rec : result.records) {
        nlohmann::json j;
        j["round"] = rec.round;
        j["stage"] = rec.stage;
        j["clients"] = rec.clients;
        j["client_loss"] = rec.client_loss;
        j["transfers"] = rec.transfers;
        if (rec.evaluated) {
            j["accuracy"] = rec.accuracy;
            j["loss"] = rec.loss;
        }
        if (!rec.layer_perms.empty()) j["layer_perms"] = rec.layer_perms;
        if (!rec.dispatch_perm.empty()) j["dispatch_perm"] = rec.dispatch_perm;
        j["wall_ms"] = rec.wall_ms;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string manifest_json(const RunOutput& run, const Config& cfg, const std::string& run_dir) {
    nlohmann::json j;
    j["schema"] = "fedmr-run-manifest-v1";
    j["config_hash"] = run.config_hash;
    j["resolved_config"] = run.resolved_config;
    j["seeds"] = {{"init", cfg.experiment.seeds.init},
                  {"data", cfg.experiment.seeds.data},
                  {"sampling", cfg.experiment.seeds.sampling},
                  {"recombine", cfg.experiment.seeds.recombine}};
    j["run_dir"] = run_dir;
    j["outputs"] = {{"metrics", "metrics.csv"},
                    {"rounds", "rounds.jsonl"},
                    {"model", "model.ckpt"},
                    {"partition", "partition.json"},
                    {"config", "config.resolved.toml"}};
    j["rounds"] = run.result.records.size();
    j["final_accuracy"] = run.result.final_accuracy;
    j["final_loss"] = run.result.final_loss;
    j["started_utc"] = run.started_utc;
    j["finished_utc"] = run.finished_utc;
    j["completed"] = true;
    return j.dump(2);
}

std::string write_run_dir(const RunOutput& run, const Config& cfg, const std::string& out_parent) {
    fs::path dir = fs::path(out_parent) / run.config_hash;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io_error, dir.string() + ": cannot create run directory (" + ec.message() + ")");

    try {
        write_text_file(dir / "config.resolved.toml", run.resolved_config);
        write_text_file(dir / "metrics.csv", metrics_csv(run.result));
        write_text_file(dir / "rounds.jsonl", rounds_jsonl(run.result));
        write_text_file(dir / "partition.json", run.partition_manifest);
        save_checkpoint(run.result.final_model, (dir / "model.ckpt").string());
        // manifest last: its presence marks a complete run directory
        write_text_file(dir / "manifest.json", manifest_json(run, cfg, dir.string()));
    } catch (...) {
        fs::remove_all(dir, ec);
        throw;
    }
    return dir.string();
}

} // namespace fedmr
