#ifndef MHOP_SIM_H
#define MHOP_SIM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MhsStatus {
  MHS_STATUS_OK = 0,
  MHS_STATUS_NULL_POINTER = 1,
  MHS_STATUS_INVALID_ARGUMENT = 2,
  MHS_STATUS_UNKNOWN_NODE = 3,
  MHS_STATUS_PARSE_ERROR = 4,
  MHS_STATUS_IO_ERROR = 5,
  MHS_STATUS_PANIC = 6,
} MhsStatus;

typedef enum MhsProfile {
  MHS_PROFILE_OLSR_DEFAULT = 0,
  MHS_PROFILE_EOLSR = 1,
} MhsProfile;

typedef enum MhsMetric {
  MHS_METRIC_ETX = 0,
  MHS_METRIC_INV_ETX = 1,
  MHS_METRIC_ML = 2,
  MHS_METRIC_MD = 3,
} MhsMetric;

typedef enum MhsBudget {
  MHS_BUDGET_FEASIBLE = 0,
  MHS_BUDGET_CRITICAL = 1,
  MHS_BUDGET_INFEASIBLE = 2,
} MhsBudget;

// Opaque topology handle.
typedef struct MhsTopology MhsTopology;

// Counters and performance of one run. `e2ed` and `nrl` are NaN when
// nothing was delivered.
typedef struct MhsStats {
  uint64_t data_sent;
  uint64_t data_delivered;
  uint64_t in_flight;
  uint64_t drop_loss;
  uint64_t drop_no_route;
  uint64_t drop_ttl;
  uint64_t drop_queue;
  uint64_t routing_packets_transmitted;
  uint64_t hello_tx;
  uint64_t tc_tx;
  uint64_t tc_triggered_tx;
  uint64_t probe_tx;
  uint64_t hello_receptions;
  uint64_t tc_default_originated;
  uint64_t mpr_changes;
  double throughput;
  double e2ed;
  double nrl;
} MhsStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful call. Valid until the next call into the library on the same
// thread.
const char *mhs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *mhs_version(void);

// Generates a connected random topology, trying `seed`, `seed + 1`, ... up
// to `max_attempts` placements.
//
// # Safety
// `out` must be valid for writes. The handle written there must be released
// with [`mhs_topology_free`].
enum MhsStatus mhs_topology_generate(size_t nodes,
                                     double side,
                                     double radio_range,
                                     uint64_t seed,
                                     uint32_t max_attempts,
                                     struct MhsTopology **out);

// Parses the plain-text topology format (`N id x y` and
// `L i j fd rd cap` lines).
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` valid for writes.
enum MhsStatus mhs_topology_parse(const char *text, struct MhsTopology **out);

// Serializes a topology. The string written to `out` must be released with
// [`mhs_string_free`].
//
// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_topology_to_text(const struct MhsTopology *t, char **out);

// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_topology_node_count(const struct MhsTopology *t, size_t *out);

// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_topology_degree(const struct MhsTopology *t, uint32_t id, size_t *out);

// Releases a topology handle. Null is ignored.
//
// # Safety
// `t` must be null or a handle from this library not yet freed.
void mhs_topology_free(struct MhsTopology *t);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void mhs_string_free(char *s);

// Simulates `flows` random CBR flows at `rate` packets/s over the given
// topology with default link and MAC settings.
//
// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_simulate(const struct MhsTopology *t,
                            enum MhsProfile profile_,
                            enum MhsMetric metric_,
                            double rate,
                            size_t flows,
                            double duration,
                            uint64_t seed,
                            struct MhsStats *out);

// Runs one seed of one matrix cell with the default experiment settings
// (50 nodes, 20 flows, 50 s warm-up) and the given measured duration.
//
// # Safety
// `out` must be valid for writes.
enum MhsStatus mhs_run_cell(enum MhsProfile profile_,
                            enum MhsMetric metric_,
                            double rate,
                            uint64_t seed,
                            double duration,
                            struct MhsStats *out);

// Cost of a path given per-link forward and reverse delivery ratios and
// one-way delays (`delay` may be null for metrics other than MD).
//
// # Safety
// `fd` and `rd` must point to `len` readable doubles, `delay` to `len`
// readable doubles or be null, and `out` must be valid for writes.
enum MhsStatus mhs_path_cost(enum MhsMetric metric_,
                             const double *fd,
                             const double *rd,
                             const double *delay,
                             size_t len,
                             double *out);

// Periodic HELLO cost over a network lifetime of `tau_nl` seconds.
//
// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_hello_cost(const struct MhsTopology *t,
                              double tau_nl,
                              double hello_interval,
                              double *out);

// Periodic TC cost over a network lifetime of `tau_nl` seconds.
//
// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_tc_default_cost(const struct MhsTopology *t,
                                   double tau_nl,
                                   double tc_interval,
                                   double *out);

// Largest bottleneck capacity over all `source -> sink` paths.
//
// # Safety
// `t` must be a live handle and `out` valid for writes.
enum MhsStatus mhs_widest_path(const struct MhsTopology *t,
                               uint32_t source,
                               uint32_t sink,
                               double *out);

// # Safety
// `out` must be valid for writes.
enum MhsStatus mhs_check_budget(double energy_sum,
                                double latency_sum,
                                double beta_cri,
                                double tau_cri,
                                enum MhsBudget *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHOP_SIM_H */
