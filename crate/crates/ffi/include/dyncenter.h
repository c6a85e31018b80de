#ifndef DYNCENTER_H
#define DYNCENTER_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DcMarketClass {
  DC_MARKET_CLASS_UNCONCENTRATED = 0,
  DC_MARKET_CLASS_MODERATELY_CONCENTRATED = 1,
  DC_MARKET_CLASS_HIGHLY_CONCENTRATED = 2,
} DcMarketClass;

typedef enum DcMergerAction {
  DC_MERGER_ACTION_NO_FURTHER_ANALYSIS = 0,
  DC_MERGER_ACTION_POTENTIAL_CONCERN_SCRUTINY = 1,
  DC_MERGER_ACTION_PRESUMED_ENHANCES_MARKET_POWER = 2,
} DcMergerAction;

typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_ARGUMENT = 2,
  DC_STATUS_INVALID_UTF8 = 3,
  DC_STATUS_PARSE_ERROR = 4,
  DC_STATUS_NOT_PRODUCTIVE = 5,
  DC_STATUS_SINGULAR = 6,
  DC_STATUS_INDEX_OUT_OF_RANGE = 7,
  DC_STATUS_PANIC = 99,
} DcStatus;

/*
 Opaque input-output table.
 */
typedef struct DcIoTable DcIoTable;

/*
 Opaque linkage report.
 */
typedef struct DcLinkage DcLinkage;

typedef struct DcSectorLinkage {
  double u_backward;
  double u_forward;
  double v_backward;
  double v_forward;
  bool key_sector;
} DcSectorLinkage;

typedef struct DcHhiVerdict {
  double pre_hhi;
  double delta_hhi;
  double post_hhi;
  enum DcMarketClass market_class;
  enum DcMergerAction action;
} DcHhiVerdict;

typedef struct DcTechProfile {
  double technoware;
  double inforware;
  double humanware;
  double orgaware;
  /*
   Exponents in T, I, H, O order.
   */
  double beta[4];
  double alpha;
  double eva;
} DcTechProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call into this library on the thread.
 */
const char *dc_last_error_message(void);

/*
 Parses a table from CSV text (`sector,<labels>,final_demand,gross_output`).

 # Safety
 `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum DcStatus dc_io_table_from_csv(const char *csv, struct DcIoTable **out);

/*
 Builds a table from row-major `flows` (n*n), `final_demand` and
 `gross_output` (n each). Sectors are labelled `s1..sn`.

 # Safety
 Array pointers must reference the stated number of doubles; `out` must be writable.
 */
enum DcStatus dc_io_table_from_arrays(uintptr_t n,
                                      const double *flows,
                                      const double *final_demand,
                                      const double *gross_output,
                                      struct DcIoTable **out);

/*
 # Safety
 `table` must be a live handle; `out` must be writable.
 */
enum DcStatus dc_io_table_sector_count(const struct DcIoTable *table, uintptr_t *out);

/*
 # Safety
 `table` must be null or a handle from this library not yet freed.
 */
void dc_io_table_free(struct DcIoTable *table);

/*
 Dispersion indices and key sectors with median V thresholds.

 # Safety
 `table` must be a live handle; `out` must be writable.
 */
enum DcStatus dc_linkage_compute(const struct DcIoTable *table, struct DcLinkage **out);

/*
 As [`dc_linkage_compute`] with fixed V thresholds.

 # Safety
 `table` must be a live handle; `out` must be writable.
 */
enum DcStatus dc_linkage_compute_fixed(const struct DcIoTable *table,
                                       double v_backward_max,
                                       double v_forward_max,
                                       struct DcLinkage **out);

/*
 # Safety
 `linkage` must be a live handle; `out` must be writable.
 */
enum DcStatus dc_linkage_len(const struct DcLinkage *linkage, uintptr_t *out);

/*
 Indices for zero-based sector `k`.

 # Safety
 `linkage` must be a live handle; `out` must be writable.
 */
enum DcStatus dc_linkage_get(const struct DcLinkage *linkage,
                             uintptr_t k,
                             struct DcSectorLinkage *out);

/*
 # Safety
 `linkage` must be null or a handle from this library not yet freed.
 */
void dc_linkage_free(struct DcLinkage *linkage);

/*
 Sum of squared percentage shares.

 # Safety
 `shares` must reference `n` doubles; `out` must be writable.
 */
enum DcStatus dc_hhi(const double *shares, uintptr_t n, double *out);

/*
 `2 * s_a * s_b`.
 */
double dc_delta_hhi(double s_a, double s_b);

/*
 Screens a merger of zero-based firms `a` and `b`.

 # Safety
 `shares` must reference `n` doubles; `out` must be writable.
 */
enum DcStatus dc_merger_screen(const double *shares,
                               uintptr_t n,
                               uintptr_t a,
                               uintptr_t b,
                               struct DcHhiVerdict *out);

/*
 Technology content coefficient of a profile.

 # Safety
 `profile` must be readable; `out` must be writable.
 */
enum DcStatus dc_tcc(const struct DcTechProfile *profile, double *out);

/*
 `TCC / 9 * EVA`.

 # Safety
 `out` must be writable.
 */
enum DcStatus dc_tca(double tcc, double eva, double *out);

/*
 Shannon entropy in nats of non-negative weights, normalized to shares first.

 # Safety
 `weights` must reference `n` doubles; `out` must be writable.
 */
enum DcStatus dc_entropy(const double *weights, uintptr_t n, double *out);

/*
 Evaluates a production plan given as JSON; writes the evaluation JSON to `out_json`.

 # Safety
 `plan_json` must be a NUL-terminated string; `out_json` must be writable.
 Release the result with [`dc_string_free`].
 */
enum DcStatus dc_evaluate_plan_json(const char *plan_json, char **out_json);

/*
 # Safety
 `s` must be null or a string returned by this library not yet freed.
 */
void dc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNCENTER_H */
