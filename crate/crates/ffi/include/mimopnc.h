#ifndef MIMOPNC_H
#define MIMOPNC_H

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MimopncStatus {
  MIMOPNC_STATUS_OK = 0,
  MIMOPNC_STATUS_NULL_POINTER = 1,
  MIMOPNC_STATUS_INVALID_ARGUMENT = 2,
  MIMOPNC_STATUS_DEGENERATE_CHANNEL = 3,
  MIMOPNC_STATUS_INVALID_COEFFICIENT = 4,
  MIMOPNC_STATUS_CONFIG = 5,
  MIMOPNC_STATUS_NO_CROSSING = 6,
  MIMOPNC_STATUS_IO = 7,
  MIMOPNC_STATUS_PARSE = 8,
  MIMOPNC_STATUS_PANIC = 9,
} MimopncStatus;

typedef enum MimopncDetector {
  MIMOPNC_DETECTOR_VBLAST_NC = 0,
  MIMOPNC_DETECTOR_VBLAST_PNC = 1,
  MIMOPNC_DETECTOR_SORTED_VBLAST_NC = 2,
  MIMOPNC_DETECTOR_SORTED_VBLAST_PNC = 3,
  MIMOPNC_DETECTOR_LINEAR_ZF_NC = 4,
  MIMOPNC_DETECTOR_ML_ORACLE = 5,
} MimopncDetector;

// Opaque simulation configuration.
typedef struct MimopncConfig MimopncConfig;

// Opaque list of BER records.
typedef struct MimopncResults MimopncResults;

typedef struct MimopncComplex {
  double re;
  double im;
} MimopncComplex;

// Row-major 2x2 complex matrix.
typedef struct MimopncMat2 {
  struct MimopncComplex h11;
  struct MimopncComplex h12;
  struct MimopncComplex h21;
  struct MimopncComplex h22;
} MimopncMat2;

typedef struct MimopncVec2 {
  struct MimopncComplex a;
  struct MimopncComplex b;
} MimopncVec2;

// XOR decision; each field is 0 or 1.
typedef struct MimopncBits {
  uint8_t re;
  uint8_t im;
} MimopncBits;

typedef struct MimopncBerRecord {
  uint32_t detector;
  double snr_db;
  uint64_t bits_total;
  uint64_t bit_errors;
  double ber;
  uint64_t degenerate_count;
} MimopncBerRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread ("" if none).
const char *mimopnc_last_error(void);

// Canonical name of a detector (e.g. "vblast_pnc"), or null for an unknown id.
const char *mimopnc_detector_name(uint32_t detector);

// QR factorization with real nonnegative diagonal.
//
// # Safety
// `h`, `q_out` and `r_out` must be null or valid pointers.
enum MimopncStatus mimopnc_qr_decompose(const struct MimopncMat2 *h,
                                        struct MimopncMat2 *q_out,
                                        struct MimopncMat2 *r_out);

// Run one detector on a received vector. `noise_var` is the per-dimension
// noise variance; only the ML oracle uses it.
//
// # Safety
// `y`, `h` and `out` must be null or valid pointers.
enum MimopncStatus mimopnc_detect(uint32_t detector,
                                  const struct MimopncVec2 *y,
                                  const struct MimopncMat2 *h,
                                  double noise_var,
                                  struct MimopncBits *out);

// New configuration with all six detectors and Rayleigh fading.
//
// # Safety
// `grid` must hold `grid_len` doubles; `out` must be a valid pointer.
enum MimopncStatus mimopnc_config_new(const double *grid,
                                      size_t grid_len,
                                      uint64_t symbols_per_point,
                                      uint64_t seed,
                                      struct MimopncConfig **out);

// Replace the detector set.
//
// # Safety
// `cfg` must come from [`mimopnc_config_new`]; `ids` must hold `len` values.
enum MimopncStatus mimopnc_config_set_detectors(struct MimopncConfig *cfg,
                                                const uint32_t *ids,
                                                size_t len);

// Hold the channel fixed at `h` for every symbol (null restores Rayleigh).
//
// # Safety
// `cfg` must come from [`mimopnc_config_new`]; `h` must be null or valid.
enum MimopncStatus mimopnc_config_set_fixed_channel(struct MimopncConfig *cfg,
                                                    const struct MimopncMat2 *h);

// # Safety
// `cfg` must be null or come from [`mimopnc_config_new`], freed once.
void mimopnc_config_free(struct MimopncConfig *cfg);

// Run the full sweep on `workers` threads (0 = default pool). Results do
// not depend on `workers`.
//
// # Safety
// `cfg` must come from [`mimopnc_config_new`]; `out` must be valid.
enum MimopncStatus mimopnc_sweep(const struct MimopncConfig *cfg,
                                 uint32_t workers,
                                 struct MimopncResults **out);

// # Safety
// `res` must be null or a live results handle.
size_t mimopnc_results_len(const struct MimopncResults *res);

// # Safety
// `res` must be a live results handle; `out` must be valid.
enum MimopncStatus mimopnc_results_get(const struct MimopncResults *res,
                                       size_t index,
                                       struct MimopncBerRecord *out);

// Write results in the CLI's CSV format.
//
// # Safety
// `res` must be a live results handle; `path` a NUL-terminated string.
enum MimopncStatus mimopnc_results_write_csv(const struct MimopncResults *res, const char *path);

// # Safety
// `path` must be a NUL-terminated string; `out` must be valid.
enum MimopncStatus mimopnc_results_read_csv(const char *path, struct MimopncResults **out);

// SNR gap `snr(b) - snr(a)` in dB at `target_ber`.
//
// # Safety
// `res` must be a live results handle; `out_db` must be valid.
enum MimopncStatus mimopnc_results_gap_db(const struct MimopncResults *res,
                                          uint32_t det_a,
                                          uint32_t det_b,
                                          double target_ber,
                                          double *out_db);

// # Safety
// `res` must be null or a results handle, freed once.
void mimopnc_results_free(struct MimopncResults *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMOPNC_H */
