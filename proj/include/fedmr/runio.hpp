#pragma once

#include <string>
#include <vector>

#include "fedmr/config.hpp"

namespace fedmr {

struct PreparedData {
    Dataset train;
    Dataset test;
    std::vector<std::vector<std::size_t>> indices; // per-client sample indices
    std::vector<ClientShard> shards;
};

// Materializes the datasets and client shards a configuration describes.
PreparedData prepare_data(const Config& cfg);

struct RunOutput {
    RunResult result;
    std::string resolved_config;
    std::string config_hash;
    std::string partition_manifest;
    std::string started_utc;
    std::string finished_utc;
};

// Validates, prepares data and runs the experiment end to end.
RunOutput execute_run(const Config& cfg);

// Deterministic serializations of the run record stream.
std::string metrics_csv(const RunResult& result);
std::string rounds_jsonl(const RunResult& result);
std::string manifest_json(const RunOutput& run, const Config& cfg, const std::string& run_dir);

// Writes the content-addressed run directory <out_parent>/<config-hash>/
// containing metrics.csv, rounds.jsonl, model.ckpt, partition.json,
// config.resolved.toml and manifest.json. Returns the run directory path.
// On failure, files created so far are removed.
std::string write_run_dir(const RunOutput& run, const Config& cfg, const std::string& out_parent);

} // namespace fedmr
