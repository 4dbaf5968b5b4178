// Command-line front end for the fedmr engine. Talks to the engine purely
// through the C API in fedmr.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedmr.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

int exit_code_for(int status) {
    switch (status) {
        case FEDMR_OK: return kExitOk;
        case FEDMR_ERR_PARSE:
        case FEDMR_ERR_VALIDATION:
        case FEDMR_ERR_INVALID_ARGUMENT: return kExitConfig;
        default: return kExitRuntime;
    }
}

// Owned string coming back from the C API.
struct ApiString {
    char* ptr = nullptr;
    ~ApiString() { fedmr_string_free(ptr); }
    std::string str() const { return ptr != nullptr ? std::string(ptr) : std::string(); }
};

struct ConfigHandle {
    fedmr_config* ptr = nullptr;
    ~ConfigHandle() { fedmr_config_free(ptr); }
};

struct ResultHandle {
    fedmr_result* ptr = nullptr;
    ~ResultHandle() { fedmr_result_free(ptr); }
};

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = "runs";
    std::string seed_init, seed_data, seed_sampling, seed_recombine;
};

void add_set_flags(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--set", opts.sets, "Override a config field, key=value (repeatable)");
    cmd->add_option("--seed-init", opts.seed_init, "Override seeds.init");
    cmd->add_option("--seed-data", opts.seed_data, "Override seeds.data");
    cmd->add_option("--seed-sampling", opts.seed_sampling, "Override seeds.sampling");
    cmd->add_option("--seed-recombine", opts.seed_recombine, "Override seeds.recombine");
}

int fail_with(int status, const std::string& context) {
    std::cerr << "error: " << context << ": " << fedmr_last_error() << "\n";
    return exit_code_for(status);
}

// Loads (or creates) a config and applies --set/--seed-* overrides.
int load_config(const std::string& path, const CommonOptions& opts, ConfigHandle& out) {
    int rc = path.empty() ? fedmr_config_create(&out.ptr) : fedmr_config_load(path.c_str(), &out.ptr);
    if (rc != FEDMR_OK) return fail_with(rc, path.empty() ? "default config" : path);

    for (const std::string& kv : opts.sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return kExitConfig;
        }
        rc = fedmr_config_set(out.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (rc != FEDMR_OK) return fail_with(rc, "--set " + kv);
    }
    const std::pair<const char*, const std::string*> seed_flags[] = {
        {"seeds.init", &opts.seed_init},
        {"seeds.data", &opts.seed_data},
        {"seeds.sampling", &opts.seed_sampling},
        {"seeds.recombine", &opts.seed_recombine},
    };
    for (const auto& [key, value] : seed_flags) {
        if (value->empty()) continue;
        rc = fedmr_config_set(out.ptr, key, value->c_str());
        if (rc != FEDMR_OK) return fail_with(rc, std::string("--") + key);
    }
    return kExitOk;
}

int cmd_run(const CommonOptions& opts) {
    ConfigHandle cfg;
    if (int rc = load_config(opts.config_path, opts, cfg); rc != kExitOk) return rc;
    if (int rc = fedmr_config_validate(cfg.ptr); rc != FEDMR_OK) return fail_with(rc, "config validation");

    ResultHandle res;
    if (int rc = fedmr_run(cfg.ptr, &res.ptr); rc != FEDMR_OK) return fail_with(rc, "run");

    ApiString run_dir;
    if (int rc = fedmr_result_write(res.ptr, opts.out_dir.c_str(), &run_dir.ptr); rc != FEDMR_OK) {
        return fail_with(rc, "writing run outputs");
    }

    std::printf("run complete: %zu rounds, final accuracy %.4f, loss %.4f\n",
                fedmr_result_num_rounds(res.ptr), fedmr_result_final_accuracy(res.ptr),
                fedmr_result_final_loss(res.ptr));
    std::printf("outputs: %s\n", run_dir.str().c_str());
    return kExitOk;
}

int cmd_validate(const CommonOptions& opts) {
    ConfigHandle cfg;
    if (int rc = load_config(opts.config_path, opts, cfg); rc != kExitOk) return rc;
    if (int rc = fedmr_config_validate(cfg.ptr); rc != FEDMR_OK) return fail_with(rc, "config validation");

    ApiString text;
    if (int rc = fedmr_config_resolved_text(cfg.ptr, &text.ptr); rc != FEDMR_OK) return fail_with(rc, "resolve");
    ApiString hash;
    if (int rc = fedmr_config_hash(cfg.ptr, &hash.ptr); rc != FEDMR_OK) return fail_with(rc, "hash");
    std::printf("# resolved config (hash %s)\n%s", hash.str().c_str(), text.str().c_str());
    return kExitOk;
}

std::string method_label(const std::string& path, std::map<std::string, int>& used) {
    std::string stem = std::filesystem::path(path).stem().string();
    if (stem.empty()) stem = "config";
    int n = used[stem]++;
    return n == 0 ? stem : stem + "-" + std::to_string(n + 1);
}

int cmd_compare(const std::vector<std::string>& config_paths, const CommonOptions& opts) {
    if (config_paths.size() < 2) {
        std::cerr << "error: compare needs at least two --config files\n";
        return kExitConfig;
    }

    std::vector<std::unique_ptr<ConfigHandle>> configs;
    std::vector<std::string> labels;
    std::map<std::string, int> used_labels;
    std::string shared_fingerprint;
    for (const std::string& path : config_paths) {
        auto cfg = std::make_unique<ConfigHandle>();
        if (int rc = load_config(path, opts, *cfg); rc != kExitOk) return rc;
        if (int rc = fedmr_config_validate(cfg->ptr); rc != FEDMR_OK) return fail_with(rc, path);

        // The comparison is only meaningful when every method sees the same
        // dataset, partition and data seed.
        ApiString data_text, part_text, data_seed;
        if (int rc = fedmr_config_section_text(cfg->ptr, "data", &data_text.ptr); rc != FEDMR_OK)
            return fail_with(rc, path);
        if (int rc = fedmr_config_section_text(cfg->ptr, "partition", &part_text.ptr); rc != FEDMR_OK)
            return fail_with(rc, path);
        if (int rc = fedmr_config_get(cfg->ptr, "seeds.data", &data_seed.ptr); rc != FEDMR_OK)
            return fail_with(rc, path);
        std::string fingerprint = data_text.str() + part_text.str() + data_seed.str();
        if (shared_fingerprint.empty()) {
            shared_fingerprint = fingerprint;
        } else if (fingerprint != shared_fingerprint) {
            std::cerr << "error: " << path
                      << " uses a different dataset/partition/data-seed; the comparison would be confounded\n";
            return kExitConfig;
        }

        labels.push_back(method_label(path, used_labels));
        configs.push_back(std::move(cfg));
    }

    std::filesystem::create_directories(opts.out_dir);

    struct MethodRun {
        ResultHandle result;
        double final_accuracy = 0.0;
        double best_accuracy = 0.0;
        double final_loss = 0.0;
    };
    std::vector<MethodRun> runs(configs.size());
    std::size_t max_rounds = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (int rc = fedmr_run(configs[i]->ptr, &runs[i].result.ptr); rc != FEDMR_OK) {
            return fail_with(rc, labels[i]);
        }
        ApiString run_dir;
        std::string parent = opts.out_dir + "/" + labels[i];
        if (int rc = fedmr_result_write(runs[i].result.ptr, parent.c_str(), &run_dir.ptr); rc != FEDMR_OK) {
            return fail_with(rc, labels[i]);
        }
        runs[i].final_accuracy = fedmr_result_final_accuracy(runs[i].result.ptr);
        runs[i].final_loss = fedmr_result_final_loss(runs[i].result.ptr);
        std::size_t rounds = fedmr_result_num_rounds(runs[i].result.ptr);
        max_rounds = std::max(max_rounds, rounds);
        for (std::size_t r = 0; r < rounds; ++r) {
            fedmr_round_metrics m;
            if (fedmr_result_round(runs[i].result.ptr, r, &m) == FEDMR_OK && m.evaluated != 0) {
                runs[i].best_accuracy = std::max(runs[i].best_accuracy, m.accuracy);
            }
        }
        std::printf("%s: final accuracy %.4f (outputs in %s)\n", labels[i].c_str(), runs[i].final_accuracy,
                    run_dir.str().c_str());
    }

    // round x method accuracy matrix
    std::string csv_path = opts.out_dir + "/compare.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    csv << "round";
    for (const std::string& label : labels) csv << "," << label;
    csv << "\n";
    for (std::size_t r = 0; r < max_rounds; ++r) {
        std::string row = std::to_string(r + 1);
        bool any = false;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            row += ",";
            fedmr_round_metrics m;
            if (r < fedmr_result_num_rounds(runs[i].result.ptr) &&
                fedmr_result_round(runs[i].result.ptr, r, &m) == FEDMR_OK && m.evaluated != 0) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.17g", m.accuracy);
                row += buf;
                any = true;
            }
        }
        if (any) csv << row << "\n";
    }
    csv.close();

    std::string summary_path = opts.out_dir + "/summary.csv";
    std::ofstream summary(summary_path, std::ios::trunc);
    summary << "method,final_accuracy,best_accuracy,final_loss\n";
    std::printf("\n%-20s %14s %14s %12s\n", "method", "final_acc", "best_acc", "final_loss");
    for (std::size_t i = 0; i < runs.size(); ++i) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g", labels[i].c_str(), runs[i].final_accuracy,
                      runs[i].best_accuracy, runs[i].final_loss);
        summary << line << "\n";
        std::printf("%-20s %14.4f %14.4f %12.4f\n", labels[i].c_str(), runs[i].final_accuracy,
                    runs[i].best_accuracy, runs[i].final_loss);
    }
    summary.close();
    std::printf("\nwrote %s and %s\n", csv_path.c_str(), summary_path.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedmr - federated model recombination simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fedmr_version()));

    CommonOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "Run one experiment and write its run directory");
    run->add_option("--config", run_opts.config_path, "Config file")->required();
    run->add_option("--out", run_opts.out_dir, "Parent directory for run outputs (default: runs)");
    add_set_flags(run, run_opts);

    CommonOptions cmp_opts;
    std::vector<std::string> cmp_configs;
    CLI::App* cmp = app.add_subcommand("compare", "Run several configs on the same data and merge their curves");
    cmp->add_option("--config", cmp_configs, "Config file (repeat per method)")->required();
    cmp->add_option("--out", cmp_opts.out_dir, "Output directory (default: runs)");
    add_set_flags(cmp, cmp_opts);

    CommonOptions val_opts;
    CLI::App* val = app.add_subcommand("validate", "Validate a config and print its resolved form");
    val->add_option("--config", val_opts.config_path, "Config file (omit to print the defaults)");
    add_set_flags(val, val_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) != 0 ? kExitConfig : kExitOk;
    }

    if (run->parsed()) return cmd_run(run_opts);
    if (cmp->parsed()) return cmd_compare(cmp_configs, cmp_opts);
    if (val->parsed()) return cmd_validate(val_opts);
    return kExitConfig;
}
