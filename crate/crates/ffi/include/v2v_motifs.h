#ifndef V2V_MOTIFS_H
#define V2V_MOTIFS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum V2vStatus {
  V2V_STATUS_OK = 0,
  V2V_STATUS_INVALID_ARGUMENT = 1,
  V2V_STATUS_NULL_POINTER = 2,
  V2V_STATUS_IO = 3,
  V2V_STATUS_NO_MOTIFS = 4,
  V2V_STATUS_PANIC = 5,
} V2vStatus;

/**
 * Opaque scenario results.
 */
typedef struct V2vReport V2vReport;

/**
 * Opaque scenario configuration.
 */
typedef struct V2vScenario V2vScenario;

/**
 * One sweep point of a report.
 */
typedef struct V2vSweepPoint {
  size_t sweep_point;
  size_t serving_count;
  double mean_motif_bps;
  double mean_location_bps;
  /**
   * `mean_motif_bps / mean_location_bps - 1`.
   */
  double advantage;
} V2vSweepPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *v2v_last_error_message(void);

/**
 * `omega * log2(1 + gamma)` in bit/s.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum V2vStatus v2v_rate(double gamma, double omega, double *out);

/**
 * `eta * d^-alpha`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum V2vStatus v2v_channel_gain(double distance_m, double alpha, double eta, double *out);

/**
 * Zipf request probability of the `rank`-th most popular of `m_total` files.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum V2vStatus v2v_zipf_pmf(size_t m_total, double theta, size_t rank, double *out);

/**
 * Location-based serving set: the `count` cars minimizing the summed
 * distance of every other car to its nearest serving car. Car `i` sits at
 * `(xs[i], ys[i])`; `serving[i]` is set to 1 for chosen cars, else 0.
 *
 * # Safety
 * `xs`, `ys` and `serving` must each point to `n` elements.
 */
enum V2vStatus v2v_select_serving_location(const double *xs,
                                           const double *ys,
                                           size_t n,
                                           size_t count,
                                           uint8_t *serving);

/**
 * Scenario with every parameter at its default.
 */
struct V2vScenario *v2v_scenario_new_default(void);

/**
 * Scenario from a TOML document in the command-line config format.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum V2vStatus v2v_scenario_from_toml(const char *toml, struct V2vScenario **out);

/**
 * # Safety
 * `scenario` must be null or a live handle.
 */
enum V2vStatus v2v_scenario_set_replications(struct V2vScenario *scenario, size_t replications);

/**
 * # Safety
 * `scenario` must be null or a live handle.
 */
enum V2vStatus v2v_scenario_set_seed(struct V2vScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void v2v_scenario_free(struct V2vScenario *scenario);

/**
 * Runs every sweep point and replication of `scenario`.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum V2vStatus v2v_simulate(const struct V2vScenario *scenario, struct V2vReport **out);

/**
 * Number of sweep points in `report`, 0 for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t v2v_report_num_points(const struct V2vReport *report);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum V2vStatus v2v_report_point(const struct V2vReport *report,
                                size_t index,
                                struct V2vSweepPoint *out);

/**
 * Writes the metrics CSV (`scenario,sweep_point,strategy,replication,avg_rate_bps`).
 *
 * # Safety
 * `report` must be a live handle; `path` a NUL-terminated string.
 */
enum V2vStatus v2v_report_write_metrics(const struct V2vReport *report, const char *path);

/**
 * Writes the CDF CSV (`scenario,serving_count,strategy,rate_bps,cdf`).
 *
 * # Safety
 * `report` must be a live handle; `path` a NUL-terminated string.
 */
enum V2vStatus v2v_report_write_cdf(const struct V2vReport *report, const char *path);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void v2v_report_free(struct V2vReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* V2V_MOTIFS_H */
