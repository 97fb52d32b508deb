#ifndef PILOT_INTERFERENCE_H
#define PILOT_INTERFERENCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status code returned by every entry point.
 */
typedef enum PiStatus {
  PI_STATUS_OK = 0,
  PI_STATUS_NULL_POINTER = 1,
  PI_STATUS_INVALID_CONFIG = 2,
  PI_STATUS_OUT_OF_RANGE = 3,
  PI_STATUS_INVALID_ARGUMENT = 4,
  PI_STATUS_INVALID_UTF8 = 5,
  PI_STATUS_PANIC = 6,
} PiStatus;

/*
 Closed-form case attached to a probability report.
 */
typedef enum PiCase {
  PI_CASE_NONE = 0,
  PI_CASE_SATURATED = 1,
  PI_CASE_PILOT_MULTIPLE = 2,
  PI_CASE_SINGLE_PULSE = 3,
} PiCase;

typedef enum PiFeedback {
  PI_FEEDBACK_MIN = 0,
  PI_FEEDBACK_AVG = 1,
} PiFeedback;

/*
 Opaque feasible set of repetition intervals.
 */
typedef struct PiFeasibleSet PiFeasibleSet;

/*
 Opaque validated scenario.
 */
typedef struct PiScenario PiScenario;

typedef struct PiReport {
  uint32_t m;
  double p_exact;
  double lower_bound;
  double upper_bound;
  /*
   `PI_CASE_NONE` when no closed form applies; `closed_form` is then NaN.
   */
  enum PiCase closed_form_case;
  double closed_form;
  bool predicted_nonzero;
  bool prediction_boundary;
} PiReport;

typedef struct PiBounds {
  double lower;
  double upper;
} PiBounds;

typedef struct PiMcEstimate {
  double estimate;
  /*
   Standard error of `estimate`.
   */
  double stderr_;
  uint64_t n_samples;
  uint64_t successes;
} PiMcEstimate;

typedef struct PiDmrs {
  uint32_t k_opt;
  double t_dmrs;
  double p_interference;
  bool coherence_ok;
} PiDmrs;

typedef struct PiScsi {
  uint32_t threshold_m;
  double p_accurate;
} PiScsi;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a scenario. `echo_delays` may be NULL when `n_echoes` is 0.

 # Safety
 `echo_delays` must point to `n_echoes` doubles; `out` must be writable.
 */
enum PiStatus pi_scenario_new(double t_ofdm,
                              double t_pil,
                              uint32_t n_p,
                              double t_rep,
                              double t_pulse,
                              const double *echo_delays,
                              size_t n_echoes,
                              struct PiScenario **out);

/*
 Creates a scenario from a NUL-terminated JSON object.

 # Safety
 `json` must be a valid C string; `out` must be writable.
 */
enum PiStatus pi_scenario_from_json(const char *json, struct PiScenario **out);

/*
 # Safety
 `scn` must be NULL or a handle not yet freed.
 */
void pi_scenario_free(struct PiScenario *scn);

/*
 Exact `P[M >= m]` with bounds and closed-form context.

 # Safety
 `scn` must be a live handle; `out` must be writable.
 */
enum PiStatus pi_prob_at_least(const struct PiScenario *scn, uint32_t m, struct PiReport *out);

/*
 # Safety
 `scn` must be a live handle; `out` must be writable.
 */
enum PiStatus pi_bounds(const struct PiScenario *scn, uint32_t m, struct PiBounds *out);

/*
 Monte Carlo estimate; identical inputs give identical results.

 # Safety
 `scn` must be a live handle; `out` must be writable.
 */
enum PiStatus pi_prob_monte_carlo(const struct PiScenario *scn,
                                  uint32_t m,
                                  uint64_t n_samples,
                                  uint64_t seed,
                                  struct PiMcEstimate *out);

/*
 Repetition intervals in `[trep_min, trep_max]` where `P[M >= m]` can be
 non-zero.

 # Safety
 `out` must be writable.
 */
enum PiStatus pi_feasible_set_new(uint32_t m,
                                  uint32_t n_p,
                                  double t_pil,
                                  double t_ofdm,
                                  double trep_min,
                                  double trep_max,
                                  struct PiFeasibleSet **out);

/*
 Number of disjoint intervals, or 0 for NULL.

 # Safety
 `fs` must be NULL or a live handle.
 */
size_t pi_feasible_set_len(const struct PiFeasibleSet *fs);

/*
 Largest divisor enumerated, or 0 for NULL.

 # Safety
 `fs` must be NULL or a live handle.
 */
uint32_t pi_feasible_set_q_max(const struct PiFeasibleSet *fs);

/*
 Total length of the set in seconds, or 0 for NULL.

 # Safety
 `fs` must be NULL or a live handle.
 */
double pi_feasible_set_measure(const struct PiFeasibleSet *fs);

/*
 # Safety
 `fs` must be a live handle; `lo` and `hi` must be writable.
 */
enum PiStatus pi_feasible_set_interval(const struct PiFeasibleSet *fs,
                                       size_t index,
                                       double *lo,
                                       double *hi);

/*
 # Safety
 `fs` must be NULL or a handle not yet freed.
 */
void pi_feasible_set_free(struct PiFeasibleSet *fs);

/*
 # Safety
 `out` must be writable.
 */
enum PiStatus pi_recommend_dmrs(double t_rep, double t_coh, double t_ofdm, struct PiDmrs *out);

/*
 # Safety
 `scn` must be a live handle; `out` must be writable.
 */
enum PiStatus pi_scsi_accuracy(const struct PiScenario *scn,
                               enum PiFeedback scheme,
                               struct PiScsi *out);

/*
 Copy of the last error message on this thread, or NULL if none. Release
 with [`pi_string_free`].
 */
char *pi_last_error_message(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library.
 */
void pi_string_free(char *s);

/*
 Library version as a static NUL-terminated string.
 */
const char *pi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PILOT_INTERFERENCE_H */
