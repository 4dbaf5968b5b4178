// Exercises the shared-library surface the way an external consumer would:
// only fedmr.h, opaque handles and status codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "fedmr.h"

namespace {

const char* kTinyConfig =
    "[experiment]\n"
    "algorithm = fedmr\n"
    "num_clients = 4\n"
    "participation_fraction = 0.5\n"
    "rounds = 3\n"
    "[local]\n"
    "epochs = 1\n"
    "batch_size = 10\n"
    "[data]\n"
    "samples = 80\n"
    "classes = 3\n"
    "features = 4\n"
    "test_samples = 30\n"
    "[partition]\n"
    "scheme = iid\n"
    "[model]\n"
    "hidden = [6]\n";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("version and error message surface") {
    CHECK(std::string(fedmr_version()).find('.') != std::string::npos);
    CHECK(fedmr_last_error() != nullptr);
}

TEST_CASE("config lifecycle: create, set, get, resolve, hash") {
    fedmr_config* cfg = nullptr;
    REQUIRE(fedmr_config_create(&cfg) == FEDMR_OK);

    CHECK(fedmr_config_set(cfg, "experiment.rounds", "9") == FEDMR_OK);
    char* value = nullptr;
    REQUIRE(fedmr_config_get(cfg, "experiment.rounds", &value) == FEDMR_OK);
    CHECK(std::string(value) == "9");
    fedmr_string_free(value);

    char* text = nullptr;
    REQUIRE(fedmr_config_resolved_text(cfg, &text) == FEDMR_OK);
    CHECK(std::string(text).find("rounds = 9") != std::string::npos);
    fedmr_string_free(text);

    char* section = nullptr;
    REQUIRE(fedmr_config_section_text(cfg, "local", &section) == FEDMR_OK);
    CHECK(std::string(section).find("[local]") == 0);
    fedmr_string_free(section);

    char* hash = nullptr;
    REQUIRE(fedmr_config_hash(cfg, &hash) == FEDMR_OK);
    CHECK(std::string(hash).size() == 16);
    fedmr_string_free(hash);

    CHECK(fedmr_config_validate(cfg) == FEDMR_OK);
    fedmr_config_free(cfg);
}

TEST_CASE("parse and validation failures map to their codes") {
    fedmr_config* cfg = nullptr;
    CHECK(fedmr_config_parse("[experiment]\nrounds ==\n", "x.toml", &cfg) == FEDMR_ERR_PARSE);
    CHECK(std::string(fedmr_last_error()).find("x.toml:2") != std::string::npos);

    REQUIRE(fedmr_config_create(&cfg) == FEDMR_OK);
    CHECK(fedmr_config_set(cfg, "experiment.participation_fraction", "1.5") == FEDMR_OK);
    CHECK(fedmr_config_validate(cfg) == FEDMR_ERR_VALIDATION);
    CHECK(std::string(fedmr_last_error()).find("participation_fraction") != std::string::npos);
    fedmr_config_free(cfg);

    CHECK(fedmr_config_load("/no/such/file.toml", &cfg) == FEDMR_ERR_IO);
    CHECK(fedmr_config_create(nullptr) == FEDMR_ERR_INVALID_ARGUMENT);
}

TEST_CASE("run, inspect rounds and write the run directory") {
    fedmr_config* cfg = nullptr;
    REQUIRE(fedmr_config_parse(kTinyConfig, "tiny.toml", &cfg) == FEDMR_OK);
    REQUIRE(fedmr_config_validate(cfg) == FEDMR_OK);

    fedmr_result* res = nullptr;
    REQUIRE(fedmr_run(cfg, &res) == FEDMR_OK);
    REQUIRE(fedmr_result_num_rounds(res) == 3);

    fedmr_round_metrics m;
    REQUIRE(fedmr_result_round(res, 0, &m) == FEDMR_OK);
    CHECK(m.round == 1);
    CHECK(m.evaluated == 1);
    CHECK(m.transfers == 4); // K = 2
    CHECK(std::string(m.stage) == "recombine");
    CHECK(fedmr_result_round(res, 99, &m) == FEDMR_ERR_INVALID_ARGUMENT);

    double acc = fedmr_result_final_accuracy(res);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);

    auto parent = std::filesystem::temp_directory_path() / "fedmr_capi_out";
    std::filesystem::remove_all(parent);
    char* run_dir = nullptr;
    REQUIRE(fedmr_result_write(res, parent.string().c_str(), &run_dir) == FEDMR_OK);
    std::filesystem::path dir(run_dir);
    fedmr_string_free(run_dir);

    for (const char* name : {"metrics.csv", "rounds.jsonl", "model.ckpt", "manifest.json", "partition.json",
                             "config.resolved.toml"}) {
        CHECK(std::filesystem::exists(dir / name));
    }
    std::string metrics = slurp(dir / "metrics.csv");
    CHECK(metrics.rfind("round,stage,accuracy,loss\n", 0) == 0);

    fedmr_result_free(res);
    fedmr_config_free(cfg);
    std::filesystem::remove_all(parent);
}

TEST_CASE("two runs of one config produce byte-identical metrics") {
    fedmr_config* cfg = nullptr;
    REQUIRE(fedmr_config_parse(kTinyConfig, "tiny.toml", &cfg) == FEDMR_OK);

    auto parent_a = std::filesystem::temp_directory_path() / "fedmr_capi_a";
    auto parent_b = std::filesystem::temp_directory_path() / "fedmr_capi_b";
    std::filesystem::remove_all(parent_a);
    std::filesystem::remove_all(parent_b);

    for (const auto& parent : {parent_a, parent_b}) {
        fedmr_result* res = nullptr;
        REQUIRE(fedmr_run(cfg, &res) == FEDMR_OK);
        REQUIRE(fedmr_result_write(res, parent.string().c_str(), nullptr) == FEDMR_OK);
        fedmr_result_free(res);
    }

    char* hash = nullptr;
    REQUIRE(fedmr_config_hash(cfg, &hash) == FEDMR_OK);
    std::string h(hash);
    fedmr_string_free(hash);

    CHECK(slurp(parent_a / h / "metrics.csv") == slurp(parent_b / h / "metrics.csv"));
    CHECK(slurp(parent_a / h / "rounds.jsonl") != ""); // exists and non-empty

    fedmr_config_free(cfg);
    std::filesystem::remove_all(parent_a);
    std::filesystem::remove_all(parent_b);
}
