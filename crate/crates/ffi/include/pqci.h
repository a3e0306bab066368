#ifndef PQCI_H
#define PQCI_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stdint.h>
#include <stddef.h>

typedef enum PqciOutcome {
  PQCI_OUTCOME_INTERSECT = 0,
  PQCI_OUTCOME_DISJOINT = 1,
  PQCI_OUTCOME_ABORT_DISHONEST_BOB = 2,
  PQCI_OUTCOME_ABORT_INCONSISTENT_RESULTS = 3,
  PQCI_OUTCOME_ABORT_EAVESDROPPER_DETECTED = 4,
} PqciOutcome;

typedef enum PqciStatus {
  PQCI_STATUS_OK = 0,
  PQCI_STATUS_NULL_POINTER = 1,
  PQCI_STATUS_INVALID_ARGUMENT = 2,
  PQCI_STATUS_UNSUPPORTED = 3,
  PQCI_STATUS_INTERNAL = 4,
  PQCI_STATUS_PANIC = 5,
} PqciStatus;

/**
 * Aggregated Monte Carlo statistics for one attack strategy.
 */
typedef struct PqciAttackStats PqciAttackStats;

/**
 * Bob's compiled phase oracle.
 */
typedef struct PqciOracle PqciOracle;

/**
 * Record of one protocol run and its outcome.
 */
typedef struct PqciTranscript PqciTranscript;

typedef struct PqciCircle {
  uint64_t x;
  uint64_t y;
  uint64_t r;
} PqciCircle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *pqci_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pqci_version(void);

void pqci_string_free(char *s);

/**
 * Classical predicate: squared center distance below squared radius sum.
 */
enum PqciStatus pqci_intersects(struct PqciCircle a, struct PqciCircle b, bool *result);

enum PqciStatus pqci_oracle_new(size_t t, struct PqciCircle bob, struct PqciOracle **oracle);

/**
 * Whether the oracle flips the phase of Alice's basis input.
 */
enum PqciStatus pqci_oracle_phase(const struct PqciOracle *oracle,
                                  struct PqciCircle alice,
                                  bool *flips);

void pqci_oracle_free(struct PqciOracle *oracle);

/**
 * Runs one protocol. `strategy` may be null for an honest run; otherwise it
 * is an attack name as accepted by the CLI (`alice2` is used only by
 * `alice-multi-input` and may be null).
 */
enum PqciStatus pqci_protocol_run(size_t t,
                                  struct PqciCircle alice,
                                  struct PqciCircle bob,
                                  uint64_t seed,
                                  const char *strategy,
                                  const struct PqciCircle *alice2,
                                  size_t decoys,
                                  struct PqciTranscript **transcript);

enum PqciStatus pqci_transcript_outcome(const struct PqciTranscript *transcript,
                                        enum PqciOutcome *outcome);

/**
 * Full transcript as JSON. Free the string with `pqci_string_free`.
 */
enum PqciStatus pqci_transcript_to_json(const struct PqciTranscript *transcript, char **json_out);

void pqci_transcript_free(struct PqciTranscript *transcript);

/**
 * Monte Carlo run of a named attack. `alice-superposed` is not available
 * here; use the CLI for it.
 */
enum PqciStatus pqci_attack_run(const char *strategy,
                                size_t t,
                                struct PqciCircle alice,
                                struct PqciCircle bob,
                                const struct PqciCircle *alice2,
                                size_t decoys,
                                uint64_t trials,
                                uint64_t seed,
                                struct PqciAttackStats **stats);

/**
 * Looks up one metric (e.g. `learned_x`, `inconsistent_abort`) by name.
 */
enum PqciStatus pqci_attack_stats_rate(const struct PqciAttackStats *stats,
                                       const char *metric,
                                       double *rate,
                                       uint64_t *count);

enum PqciStatus pqci_attack_stats_to_json(const struct PqciAttackStats *stats, char **json_out);

void pqci_attack_stats_free(struct PqciAttackStats *stats);

/**
 * Cost table over `len` precisions, rendered as the CLI's JSON report.
 * `passed` receives whether every check held.
 */
enum PqciStatus pqci_cost_report_json(const size_t *ts,
                                      size_t len,
                                      uint64_t seed,
                                      bool *passed,
                                      char **json_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PQCI_H */
