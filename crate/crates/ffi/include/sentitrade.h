#ifndef SENTITRADE_H
#define SENTITRADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  // Invalid configuration or malformed input data.
  ST_STATUS_VALIDATION = 3,
  // A pipeline stage ran before the stages it depends on.
  ST_STATUS_DEPENDENCY = 4,
  ST_STATUS_RUNTIME = 5,
  ST_STATUS_PANIC = 6,
} StStatus;

// A validated run configuration.
typedef struct StConfig StConfig;

// Result of a simulated trading run.
typedef struct StLedger StLedger;

// A trained model read from a train-stage artifact.
typedef struct StModel StModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes). Returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t st_last_error(char *buf, size_t len);

// `(pos - neg) / (pos + neu + neg)`; 0 when there are no posts.
double st_daily_score(uint64_t pos, uint64_t neu, uint64_t neg);

// One-sample t statistic and two-tailed p-value against a zero mean.
//
// # Safety
// `values` must point to `n` doubles; `t` and `p` must be writable.
enum StStatus st_t_test(const double *values, size_t n, double *t, double *p);

// VIF of each column of a column-major `n_rows` x `n_cols` matrix, written
// to `out` (`n_cols` doubles; infinity for an exact linear dependence).
//
// # Safety
// `data` must hold `n_rows * n_cols` doubles and `out` room for `n_cols`.
enum StStatus st_vif(const double *data, size_t n_rows, size_t n_cols, double *out);

// Trades `closes` following `dirs` (positive = up, otherwise down; length
// `n` or `n - 1`).
//
// # Safety
// `closes` must hold `n` doubles, `dirs` `n_dirs` bytes, `out` writable.
enum StStatus st_simulate(const double *closes,
                          size_t n,
                          const int8_t *dirs,
                          size_t n_dirs,
                          double cost_rate,
                          double initial,
                          struct StLedger **out);

// Best achievable schedule with perfect foresight.
//
// # Safety
// `closes` must hold `n` doubles and `out` be writable.
enum StStatus st_ideal(const double *closes,
                       size_t n,
                       double cost_rate,
                       double initial,
                       struct StLedger **out);

// # Safety
// `ledger` must come from this library and not yet be freed.
double st_ledger_final_value(const struct StLedger *ledger);

// # Safety
// `ledger` must come from this library and not yet be freed.
size_t st_ledger_transactions(const struct StLedger *ledger);

// # Safety
// `ledger` must come from this library and not yet be freed.
double st_ledger_total_cost(const struct StLedger *ledger);

// # Safety
// `ledger` must be null or come from this library; it is invalid afterwards.
void st_ledger_free(struct StLedger *ledger);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum StStatus st_config_load(const char *path, struct StConfig **out);

// Runs one stage by name, or every stage for `"all"`.
//
// # Safety
// `config` must come from `st_config_load`; `stage` must be a
// NUL-terminated string.
enum StStatus st_run(const struct StConfig *config, const char *stage);

// # Safety
// `config` must be null or come from this library.
void st_config_free(struct StConfig *config);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum StStatus st_model_load(const char *path, struct StModel **out);

// Number of feature columns the model expects.
//
// # Safety
// `model` must come from this library and not yet be freed.
size_t st_model_n_features(const struct StModel *model);

// Predicted direction (1 up, 0 down) for each row of a row-major matrix
// whose columns follow the model's training order.
//
// # Safety
// `data` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
enum StStatus st_model_predict(const struct StModel *model,
                               const double *data,
                               size_t n_rows,
                               size_t n_cols,
                               int8_t *out);

// # Safety
// `model` must be null or come from this library.
void st_model_free(struct StModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SENTITRADE_H */
