/* Minimal C consumer: sweep two detectors and print the records.
 *
 *   cargo build -p mimopnc-ffi --release
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include \
 *      target/release/libmimopnc_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <stdio.h>

#include "mimopnc.h"

int main(void) {
  const double grid[] = {0.0, 10.0, 20.0};
  const uint32_t ids[] = {MIMOPNC_DETECTOR_VBLAST_NC, MIMOPNC_DETECTOR_VBLAST_PNC};
  MimopncConfig *cfg = NULL;
  MimopncResults *res = NULL;

  if (mimopnc_config_new(grid, 3, 10000, 7, &cfg) != MIMOPNC_STATUS_OK ||
      mimopnc_config_set_detectors(cfg, ids, 2) != MIMOPNC_STATUS_OK ||
      mimopnc_sweep(cfg, 0, &res) != MIMOPNC_STATUS_OK) {
    fprintf(stderr, "error: %s\n", mimopnc_last_error());
    mimopnc_config_free(cfg);
    return 1;
  }
  for (size_t i = 0; i < mimopnc_results_len(res); ++i) {
    MimopncBerRecord r;
    mimopnc_results_get(res, i, &r);
    printf("%-16s %6.2f dB  ber=%.5e\n", mimopnc_detector_name(r.detector),
           r.snr_db, r.ber);
  }
  mimopnc_results_free(res);
  mimopnc_config_free(cfg);
  return 0;
}
