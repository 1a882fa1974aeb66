/* C interface to the qbattery simulator. All handles are opaque; every call
 * returns a qb_status and leaves a message for qb_last_error() on failure. */
#ifndef QBATTERY_H
#define QBATTERY_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define QB_API __declspec(dllexport)
#else
#define QB_API __attribute__((visibility("default")))
#endif

typedef enum {
  QB_OK = 0,
  QB_ERR_CONFIG = 1,    /* invalid configuration or argument */
  QB_ERR_NUMERICAL = 2, /* integrator, truncation or solver failure */
  QB_ERR_IO = 3,
  QB_ERR_INTERNAL = 4
} qb_status;

typedef struct qb_config qb_config;
typedef struct qb_record qb_record;

typedef struct {
  double tau;
  double ergotropy_at_tau;
  double e_b_at_tau;
  double locked_at_tau;
  double quench_off_at_tau;
  double tau2;
  double p_max;
  double max_e_b;
  double first_peak_tau;
  int window_limited;
} qb_figures;

typedef struct {
  double energy;         /* Tr[rho H] with the interaction on */
  double battery_energy; /* Tr[rho H_B] */
  double photons;
  double residual;       /* ||L rho||_1 */
  double vacuum_distance; /* trace distance to |down..down, 0> */
} qb_steady_result;

typedef void (*qb_line_sink)(const char* line, void* user);

QB_API const char* qb_version(void);
/* Message of the last failed call on this thread; empty when none. */
QB_API const char* qb_last_error(void);

QB_API qb_status qb_config_from_file(const char* path, qb_config** out);
QB_API qb_status qb_config_from_json(const char* json, qb_config** out);
/* Dotted key such as "model.kappa"; value is JSON or a bare string. */
QB_API qb_status qb_config_set(qb_config* cfg, const char* key, const char* value);
/* Copies the config as JSON into buf (NUL-terminated); *needed gets the size. */
QB_API qb_status qb_config_to_json(const qb_config* cfg, char* buf, size_t len, size_t* needed);
QB_API void qb_config_free(qb_config* cfg);

QB_API qb_status qb_simulate(const qb_config* cfg, qb_record** out);
QB_API void qb_record_free(qb_record* rec);
QB_API size_t qb_record_size(const qb_record* rec);
/* Series names: t, e_b, ergotropy, h_interaction, photons, n_ex,
 * trace_error, truncation_tail. Copies min(n, size) values. */
QB_API qb_status qb_record_series(const qb_record* rec, const char* name, double* out, size_t n);
QB_API qb_status qb_record_figures(const qb_record* rec, qb_figures* out);
QB_API qb_status qb_record_write_csv(const qb_record* rec, const char* path);

/* Writes sweep.csv (and sweep_fit.csv on the m axis) into out_dir.
 * threads <= 0 uses QB_THREADS or the hardware. *failed_rows may be NULL. */
QB_API qb_status qb_sweep(const qb_config* cfg, const char* out_dir, int threads, int* failed_rows);

QB_API qb_status qb_steady_state(const qb_config* cfg, qb_steady_result* out);

/* Runs the self-check suite, one line per check; *failures may be NULL. */
QB_API qb_status qb_run_checks(qb_line_sink sink, void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif
