#include <math.h>
#include <stdio.h>
#include <string.h>

#include "gtl.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      const char *e = gtl_last_error();                              \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
              e ? e : "no error");                                   \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  GtlOverhead o;
  CHECK(gtl_overhead_predict(10, 10, 325.0, 20.0, 3000, 324.0, &o) == GTL_STATUS_OK);
  CHECK(o.gtl_step1 == 10.0 * 9.0 * 10.0 * 325.0);
  CHECK(o.nohtl_mu == 2.0 * 10.0 * 9.0 * 325.0);
  CHECK(o.bound == 2.0 * 10.0 * 100.0 * 325.0);
  CHECK(gtl_overhead_predict(1, 10, 325.0, 20.0, 3000, 324.0, &o) == GTL_STATUS_CONFIG);

  GtlConfig *config = NULL;
  CHECK(gtl_config_from_toml("runs = 0", &config) == GTL_STATUS_CONFIG);
  CHECK(config == NULL);
  CHECK(gtl_config_preset("synthetic", &config) == GTL_STATUS_OK);
  CHECK(gtl_config_set_runs(config, 3, 1) == GTL_STATUS_OK);

  GtlReport *report = NULL;
  CHECK(gtl_experiment_run(config, &report) == GTL_STATUS_OK);
  double f = NAN;
  CHECK(gtl_report_metric(report, "clean", "gtl_mean", "f_measure", &f) == GTL_STATUS_OK);
  CHECK(f > 0.0 && f <= 1.0);
  uint64_t coefficients = 0, bytes = 0;
  CHECK(gtl_report_traffic(report, "gtl", &coefficients, &bytes) == GTL_STATUS_OK);
  CHECK(coefficients > 0 && bytes == 8 * coefficients);
  size_t samples = 1;
  CHECK(gtl_report_sample_messages(report, &samples) == GTL_STATUS_OK);
  CHECK(samples == 0);
  char *tables = NULL;
  CHECK(gtl_report_tables(report, &tables) == GTL_STATUS_OK);
  CHECK(strstr(tables, "gtl_mean") != NULL);
  gtl_string_free(tables);

  gtl_report_free(report);
  gtl_config_free(config);
  printf("ok %s\n", gtl_version());
  return 0;
}
