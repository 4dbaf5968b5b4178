/*
 * fedmr — federated model recombination simulation engine.
 *
 * C interface to the engine: opaque handles plus integer status codes.
 * Every function returns FEDMR_OK on success; on failure it returns a
 * nonzero code and fedmr_last_error() carries a thread-local message.
 * Strings returned through char** are heap-allocated; release them with
 * fedmr_string_free().
 */

#ifndef FEDMR_H
#define FEDMR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct fedmr_config fedmr_config;
typedef struct fedmr_result fedmr_result;

enum {
    FEDMR_OK = 0,
    FEDMR_ERR_INVALID_ARGUMENT = 1,
    FEDMR_ERR_PARSE = 2,
    FEDMR_ERR_VALIDATION = 3,
    FEDMR_ERR_IO = 4,
    FEDMR_ERR_INTERNAL = 5
};

const char* fedmr_version(void);

/* Message for the most recent failure on this thread ("" if none). */
const char* fedmr_last_error(void);

void fedmr_string_free(char* s);

/* --- configuration ----------------------------------------------------- */

/* New configuration with every field at its default value. */
int fedmr_config_create(fedmr_config** out);

/* Parse a sectioned key = value config file. */
int fedmr_config_load(const char* path, fedmr_config** out);

/* Parse config text directly (source_name is used in diagnostics). */
int fedmr_config_parse(const char* text, const char* source_name, fedmr_config** out);

/* Set one field, e.g. ("experiment.rounds", "20"). Bare keys are accepted
 * when unambiguous. */
int fedmr_config_set(fedmr_config* cfg, const char* key, const char* value);

/* Get one field as text ("section.key"). */
int fedmr_config_get(const fedmr_config* cfg, const char* key, char** out);

/* Full validation; FEDMR_ERR_VALIDATION lists every bad field. */
int fedmr_config_validate(const fedmr_config* cfg);

/* Canonical resolved config text (defaults applied). */
int fedmr_config_resolved_text(const fedmr_config* cfg, char** out);

/* Canonical text of one section, e.g. "data". */
int fedmr_config_section_text(const fedmr_config* cfg, const char* section, char** out);

/* 16-hex-char content hash of the resolved config. */
int fedmr_config_hash(const fedmr_config* cfg, char** out);

void fedmr_config_free(fedmr_config* cfg);

/* --- running ------------------------------------------------------------ */

/* Validate, build datasets/shards and run the experiment. */
int fedmr_run(const fedmr_config* cfg, fedmr_result** out);

typedef struct fedmr_round_metrics {
    int32_t round;
    int32_t evaluated; /* 0 when this round was not scored */
    double accuracy;
    double loss;
    int32_t transfers;
    char stage[16];
} fedmr_round_metrics;

size_t fedmr_result_num_rounds(const fedmr_result* res);
int fedmr_result_round(const fedmr_result* res, size_t index, fedmr_round_metrics* out);
double fedmr_result_final_accuracy(const fedmr_result* res);
double fedmr_result_final_loss(const fedmr_result* res);

/* Write the content-addressed run directory under out_parent; returns its
 * path through run_dir_out. */
int fedmr_result_write(const fedmr_result* res, const char* out_parent, char** run_dir_out);

void fedmr_result_free(fedmr_result* res);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FEDMR_H */
