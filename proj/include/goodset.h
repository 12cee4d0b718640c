/* C interface to the goodset audit library: opaque handles, status codes. */
#ifndef GOODSET_H
#define GOODSET_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct gs_config gs_config;
typedef struct gs_report gs_report;

typedef enum {
  GS_OK = 0,
  GS_ERROR = 1,      /* details via gs_last_error() */
  GS_INFEASIBLE = 2  /* empty good set at the configured tolerance */
} gs_status;

const char* gs_version(void);

/* Message for the most recent failure on the calling thread ("" if none). */
const char* gs_last_error(void);

gs_status gs_config_load(const char* path, gs_config** out);

/* value is parsed as a JSON literal when possible, else stored as a string. */
gs_status gs_config_set(gs_config* cfg, const char* dotted_key, const char* value);

/* Writes the 16-hex-digit config content digest into buf (cap >= 17). */
gs_status gs_config_hash(const gs_config* cfg, char* buf, size_t cap);

void gs_config_free(gs_config* cfg);

/* command: "range" | "min-abs" | "bgl" | "selective-prep" | "evaluate" |
 * "synth-gen". Report files are written under outdir; *out (optional) receives
 * a handle to the machine-readable report. */
gs_status gs_run(const gs_config* cfg, const char* command, const char* outdir, gs_report** out);

/* Serialized report JSON; the string is owned by the handle. */
const char* gs_report_json(const gs_report* rep);

void gs_report_free(gs_report* rep);

#ifdef __cplusplus
}
#endif

#endif /* GOODSET_H */
