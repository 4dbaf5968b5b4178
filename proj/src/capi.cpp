#include "fedmr.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "fedmr/config.hpp"
#include "fedmr/error.hpp"
#include "fedmr/runio.hpp"

using fedmr::Config;
using fedmr::Error;
using fedmr::ErrorCode;
using fedmr::RunOutput;

struct fedmr_config {
    Config cfg;
};

struct fedmr_result {
    Config cfg;
    RunOutput run;
};

namespace {

thread_local std::string g_last_error;

int code_of(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_argument: return FEDMR_ERR_INVALID_ARGUMENT;
        case ErrorCode::shape_mismatch: return FEDMR_ERR_INVALID_ARGUMENT;
        case ErrorCode::parse_error: return FEDMR_ERR_PARSE;
        case ErrorCode::validation_error: return FEDMR_ERR_VALIDATION;
        case ErrorCode::io_error: return FEDMR_ERR_IO;
    }
    return FEDMR_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + last-error message.
template <typename F>
int guarded(F&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FEDMR_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return code_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FEDMR_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return FEDMR_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int require(bool ok, const char* message) {
    if (ok) return FEDMR_OK;
    g_last_error = message;
    return FEDMR_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* fedmr_version(void) { return "1.0.0"; }

const char* fedmr_last_error(void) { return g_last_error.c_str(); }

void fedmr_string_free(char* s) { delete[] s; }

int fedmr_config_create(fedmr_config** out) {
    if (int rc = require(out != nullptr, "out pointer is null")) return rc;
    return guarded([&] { *out = new fedmr_config{Config::defaults()}; });
}

int fedmr_config_load(const char* path, fedmr_config** out) {
    if (int rc = require(path != nullptr && out != nullptr, "path/out pointer is null")) return rc;
    return guarded([&] { *out = new fedmr_config{Config::from_file(path)}; });
}

int fedmr_config_parse(const char* text, const char* source_name, fedmr_config** out) {
    if (int rc = require(text != nullptr && out != nullptr, "text/out pointer is null")) return rc;
    return guarded([&] {
        *out = new fedmr_config{Config::from_text(text, source_name != nullptr ? source_name : "<memory>")};
    });
}

int fedmr_config_set(fedmr_config* cfg, const char* key, const char* value) {
    if (int rc = require(cfg != nullptr && key != nullptr && value != nullptr, "null argument")) return rc;
    return guarded([&] { cfg->cfg.apply_override(key, value); });
}

int fedmr_config_get(const fedmr_config* cfg, const char* key, char** out) {
    if (int rc = require(cfg != nullptr && key != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dup_string(cfg->cfg.get(key)); });
}

int fedmr_config_validate(const fedmr_config* cfg) {
    if (int rc = require(cfg != nullptr, "config handle is null")) return rc;
    return guarded([&] { cfg->cfg.validate(); });
}

int fedmr_config_resolved_text(const fedmr_config* cfg, char** out) {
    if (int rc = require(cfg != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dup_string(cfg->cfg.resolved_text()); });
}

int fedmr_config_section_text(const fedmr_config* cfg, const char* section, char** out) {
    if (int rc = require(cfg != nullptr && section != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dup_string(cfg->cfg.section_text(section)); });
}

int fedmr_config_hash(const fedmr_config* cfg, char** out) {
    if (int rc = require(cfg != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = dup_string(cfg->cfg.hash()); });
}

void fedmr_config_free(fedmr_config* cfg) { delete cfg; }

int fedmr_run(const fedmr_config* cfg, fedmr_result** out) {
    if (int rc = require(cfg != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto res = std::make_unique<fedmr_result>();
        res->cfg = cfg->cfg;
        res->run = fedmr::execute_run(cfg->cfg);
        *out = res.release();
    });
}

size_t fedmr_result_num_rounds(const fedmr_result* res) {
    return res == nullptr ? 0 : res->run.result.records.size();
}

int fedmr_result_round(const fedmr_result* res, size_t index, fedmr_round_metrics* out) {
    if (int rc = require(res != nullptr && out != nullptr, "null argument")) return rc;
    if (index >= res->run.result.records.size()) {
        g_last_error = "round index out of range";
        return FEDMR_ERR_INVALID_ARGUMENT;
    }
    const fedmr::RoundRecord& rec = res->run.result.records[index];
    out->round = rec.round;
    out->evaluated = rec.evaluated ? 1 : 0;
    out->accuracy = rec.accuracy;
    out->loss = rec.loss;
    out->transfers = rec.transfers;
    std::strncpy(out->stage, rec.stage.c_str(), sizeof(out->stage) - 1);
    out->stage[sizeof(out->stage) - 1] = '\0';
    return FEDMR_OK;
}

double fedmr_result_final_accuracy(const fedmr_result* res) {
    return res == nullptr ? 0.0 : res->run.result.final_accuracy;
}

double fedmr_result_final_loss(const fedmr_result* res) {
    return res == nullptr ? 0.0 : res->run.result.final_loss;
}

int fedmr_result_write(const fedmr_result* res, const char* out_parent, char** run_dir_out) {
    if (int rc = require(res != nullptr && out_parent != nullptr, "null argument")) return rc;
    return guarded([&] {
        std::string dir = fedmr::write_run_dir(res->run, res->cfg, out_parent);
        if (run_dir_out != nullptr) *run_dir_out = dup_string(dir);
    });
}

void fedmr_result_free(fedmr_result* res) { delete res; }

} // extern "C"
