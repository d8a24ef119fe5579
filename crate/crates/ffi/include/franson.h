/* Generated from franson-ffi; do not edit. */

#ifndef FRANSON_H
#define FRANSON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FRANSON_AXIS_MIRROR1 0

#define FRANSON_AXIS_PHASE2 1

typedef enum FransonStatus {
  FRANSON_STATUS_OK = 0,
  FRANSON_STATUS_NULL_POINTER = 1,
  FRANSON_STATUS_INVALID_ARGUMENT = 2,
  FRANSON_STATUS_CONFIG = 3,
  FRANSON_STATUS_IO = 4,
  FRANSON_STATUS_FIT = 5,
  FRANSON_STATUS_UNDEFINED_CORRELATION = 6,
  FRANSON_STATUS_FORMAT = 7,
  FRANSON_STATUS_PANIC = 8,
} FransonStatus;

// Opaque experiment configuration.
typedef struct FransonConfig FransonConfig;

typedef struct FransonCountSummary {
  double duration;
  double window_width;
  // Indexed by port: 0 is `+`, 1 is `-`.
  uint64_t singles_start[2];
  uint64_t singles_stop[2];
  // Order `++`, `+-`, `-+`, `--`.
  uint64_t coincidences[4];
  double accidentals[4];
} FransonCountSummary;

typedef struct FransonFringeFit {
  double mean_level;
  double visibility;
  double visibility_sigma;
  double phase0;
  double period;
  double period_sigma;
  double reduced_chi2;
  uint32_t iterations;
} FransonFringeFit;

typedef struct FransonChshReport {
  // Settings order `(a,b)`, `(a,b')`, `(a',b)`, `(a',b')`.
  double correlations[4];
  double correlation_sigmas[4];
  double s;
  double s_sigma;
  // NaN when `s` does not exceed 2.
  double significance;
  bool violates;
} FransonChshReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *franson_version(void);

// Message of the last failure on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *franson_last_error_message(void);

// Configuration with the default apparatus values. Never NULL.
struct FransonConfig *franson_config_new_default(void);

// Loads a TOML configuration file into `*out`.
enum FransonStatus franson_config_load(const char *path, struct FransonConfig **out);

// Releases a configuration. NULL is ignored.
void franson_config_free(struct FransonConfig *cfg);

enum FransonStatus franson_config_set_visibility(struct FransonConfig *cfg, double v);

enum FransonStatus franson_config_set_seed(struct FransonConfig *cfg, uint64_t seed);

// Writes the 16-character hex config hash plus NUL into `buf`, which
// must hold at least 17 bytes.
enum FransonStatus franson_config_hash(const struct FransonConfig *cfg, char *buf, size_t len);

// Probability of outcome `(i, j)`, each `+1` or `-1`.
enum FransonStatus franson_coincidence_probability(int i,
                                                   int j,
                                                   double delta1,
                                                   double delta2,
                                                   double vis,
                                                   double *out);

enum FransonStatus franson_correlation(double delta1, double delta2, double vis, double *out);

// CHSH value at the standard settings.
enum FransonStatus franson_chsh_s_standard(double vis, double *out);

double franson_accidental_rate(double singles_start, double singles_stop, double window);

enum FransonStatus franson_significance_from_visibility(double vis, double vis_sigma, double *out);

enum FransonStatus franson_simulate_setting(const struct FransonConfig *cfg,
                                            double delta1,
                                            double delta2,
                                            double duration,
                                            uint64_t seed,
                                            struct FransonCountSummary *out);

// Scans `points` settings over `periods` fringe periods along `axis`
// (`FRANSON_AXIS_*`), recording `++` coincidences, and fits the fringe.
enum FransonStatus franson_scan_fit(const struct FransonConfig *cfg,
                                    int axis,
                                    size_t points,
                                    double periods,
                                    double dwell,
                                    uint64_t seed,
                                    struct FransonFringeFit *out);

// Four-setting CHSH experiment at the standard settings.
enum FransonStatus franson_chsh(const struct FransonConfig *cfg,
                                double dwell,
                                uint64_t seed,
                                struct FransonChshReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRANSON_H */
