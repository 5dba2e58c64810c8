/*
 * tmoe — mixture-of-experts reading-comprehension engine.
 *
 * C interface over the training/inference core. Typical use:
 *
 *   tmoe_engine *eng = tmoe_engine_new();
 *   tmoe_engine_set(eng, "mode", "overfit");
 *   tmoe_engine_set(eng, "out", "/tmp/data");
 *   tmoe_status rc = tmoe_engine_run(eng, "synth");
 *   if (rc == TMOE_OK) puts(tmoe_engine_report(eng));
 *   else fputs(tmoe_engine_last_error(eng), stderr);
 *   tmoe_engine_free(eng);
 *
 * Option keys mirror the CLI flags without the leading dashes; repeated
 * tmoe_engine_set calls with the same key append (used for "checkpoint").
 * Verbs: train, pretrain, eval, predict, gradcheck, ablate, synth.
 */
#ifndef TMOE_TMOE_H
#define TMOE_TMOE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tmoe_status {
    TMOE_OK = 0,
    TMOE_ERR_USAGE = 1, /* bad verb, unknown or missing option */
    TMOE_ERR_DATA = 2,  /* file, parse or shape problem */
    TMOE_ERR_CHECK = 3  /* an internal verification failed */
} tmoe_status;

typedef struct tmoe_engine tmoe_engine;

const char *tmoe_version(void);

tmoe_engine *tmoe_engine_new(void);
void tmoe_engine_free(tmoe_engine *eng);

/* Appends one option; returns TMOE_ERR_USAGE on null arguments. */
tmoe_status tmoe_engine_set(tmoe_engine *eng, const char *key, const char *value);

/* Drops all options set so far. */
void tmoe_engine_reset(tmoe_engine *eng);

/* Runs one verb with the accumulated options. Progress and the resolved
 * configuration go to stderr; the report is retrievable afterwards. */
tmoe_status tmoe_engine_run(tmoe_engine *eng, const char *verb);

/* Report text of the last successful run; empty string otherwise.
 * Owned by the engine, valid until the next run or free. */
const char *tmoe_engine_report(const tmoe_engine *eng);

/* Message of the last failure; empty string after a success. */
const char *tmoe_engine_last_error(const tmoe_engine *eng);

#ifdef __cplusplus
}
#endif

#endif /* TMOE_TMOE_H */
