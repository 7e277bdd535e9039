/* Exercises the C interface from C, linking only the shared library. */
#include <complex.h>
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "calderon/calderon.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void count_messages(const char* message, void* user) {
  (void)message;
  ++*(int*)user;
}

static void test_basics(void) {
  EXPECT(strlen(cal_version()) > 0);
  EXPECT(strcmp(cal_status_name(CAL_OK), "ok") == 0);
  EXPECT(strcmp(cal_status_name(CAL_ERR_IO), "i/o error") == 0);

  cal_config* cfg = (cal_config*)0x1;
  EXPECT(cal_config_from_json("{ nope", &cfg) == CAL_ERR_PARAMETER);
  EXPECT(cfg == NULL);
  EXPECT(strlen(cal_last_error()) > 0);
  EXPECT(cal_config_from_json("{\"bogus\": 1}", &cfg) == CAL_ERR_PARAMETER);
  EXPECT(cal_config_from_json(NULL, &cfg) == CAL_ERR_PARAMETER);
  EXPECT(cal_config_load("/nonexistent.json", &cfg) == CAL_ERR_PARAMETER);
  cal_config_free(NULL);
  cal_dtn_free(NULL);
  cal_scattering_free(NULL);
}

static void test_config(void) {
  cal_config* cfg = NULL;
  EXPECT(cal_config_from_json("{\"geometry\": {\"n_nodes\": 32}, \"max_mode\": 8}", &cfg) == CAL_OK);
  EXPECT(strlen(cal_last_error()) == 0);
  char hash[17], hash2[17], small[4];
  EXPECT(cal_config_hash(cfg, hash, sizeof hash) == CAL_OK);
  EXPECT(strlen(hash) == 16);
  EXPECT(cal_config_hash(cfg, small, sizeof small) == CAL_ERR_PARAMETER);
  EXPECT(cal_config_set_output_dir(cfg, "elsewhere") == CAL_OK);
  EXPECT(cal_config_set_workers(cfg, 2) == CAL_OK);
  EXPECT(cal_config_set_workers(cfg, -1) == CAL_ERR_PARAMETER);
  EXPECT(cal_config_set_stages(cfg, "traces-only") == CAL_OK);
  EXPECT(cal_config_set_stages(cfg, "nonsense") == CAL_ERR_PARAMETER);
  EXPECT(cal_config_hash(cfg, hash2, sizeof hash2) == CAL_OK);
  EXPECT(strcmp(hash, hash2) == 0);
  char dir[64];
  EXPECT(cal_config_output_dir(cfg, dir, sizeof dir) == CAL_OK);
  EXPECT(strcmp(dir, "elsewhere") == 0);
  size_t needed = 0;
  EXPECT(cal_config_to_json(cfg, NULL, 0, &needed) == CAL_OK);
  EXPECT(needed > 10);
  char* text = malloc(needed);
  EXPECT(cal_config_to_json(cfg, text, needed, NULL) == CAL_OK);
  EXPECT(strstr(text, "\"n_nodes\": 32") != NULL);
  free(text);
  cal_config_free(cfg);
}

static void test_unit_chain(void) {
  cal_dtn* map = NULL;
  EXPECT(cal_dtn_unit(32, 1.0, 40, &map) == CAL_ERR_PARAMETER);
  EXPECT(map == NULL);
  EXPECT(cal_dtn_unit(32, 1.0, 8, &map) == CAL_OK);
  int n = 0, mm = 0;
  double r = 0.0, re = 0.0, im = 0.0;
  EXPECT(cal_dtn_info(map, &n, &r, &mm) == CAL_OK);
  EXPECT(n == 32 && r == 1.0 && mm == 8);
  EXPECT(cal_dtn_entry(map, 3, 3, &re, &im) == CAL_OK);
  EXPECT(re == 3.0 && im == 0.0);
  EXPECT(cal_dtn_entry(map, 9, 3, &re, &im) == CAL_ERR_PARAMETER);

  double psi11[64], psi21[64], residual = 1.0;
  const double complex k = 1.0 - 0.5 * I;
  EXPECT(cal_cgo_trace(map, creal(k), cimag(k), psi11, psi21, &residual) == CAL_OK);
  double err = 0.0;
  for (int j = 0; j < 32; ++j) {
    const double complex z = cexp(2.0 * M_PI * I * j / 32.0);
    const double complex e = cexp(I * z * k);
    err = fmax(err, cabs(psi11[2 * j] + I * psi11[2 * j + 1] - e));
    err = fmax(err, cabs(psi21[2 * j] + I * psi21[2 * j + 1]));
  }
  EXPECT(err < 1e-8);
  EXPECT(residual < 1e-10);
  EXPECT(cal_cgo_trace(map, 9.0, 0.0, psi11, psi21, NULL) == CAL_ERR_PARAMETER);

  cal_scattering *s = NULL, *dual = NULL;
  EXPECT(cal_scattering_compute(map, 4, 2.0, 0.0, 2, &s) == CAL_OK);
  int side = 0;
  double h = 0.0, rk = 0.0, s12[2], s21[2];
  EXPECT(cal_scattering_info(s, &side, &h, &rk) == CAL_OK);
  EXPECT(side == 16 && rk == 2.0 && h > 0.0);
  EXPECT(cal_scattering_value(s, 9, 7, s12, s21) == CAL_OK);
  EXPECT(fabs(s21[0]) < 1e-10 && fabs(s21[1]) < 1e-10);
  EXPECT(cal_scattering_value(s, 16, 0, s12, s21) == CAL_ERR_PARAMETER);
  EXPECT(cal_scattering_dual(s, &dual) == CAL_OK);
  double gamma = 0.0;
  EXPECT(cal_reconstruct_point(dual, 0.1, 0.2, CAL_RULE_SQUARED_REAL_PART, &gamma) == CAL_OK);
  EXPECT(fabs(gamma - 1.0) < 1e-9);
  EXPECT(cal_reconstruct_point(dual, 0.1, 0.2, (cal_gamma_rule)7, &gamma) == CAL_ERR_PARAMETER);
  cal_scattering_free(dual);
  cal_scattering_free(s);
  cal_dtn_free(map);
}

static void test_pipeline(const char* dir) {
  char json[512];
  snprintf(json, sizeof json,
           "{\"phantom\": {\"type\": \"radial-bump\"}, \"geometry\": {\"n_nodes\": 32}, \"max_mode\": 8,"
           " \"fem\": {\"resolution\": 16}, \"k_grid\": {\"m\": 4, \"R_k\": 3.0}, \"recon\": {\"z_grid\": 4},"
           " \"output_dir\": \"%s\"}",
           dir);
  cal_config* cfg = NULL;
  EXPECT(cal_config_from_json(json, &cfg) == CAL_OK);
  int messages = 0;
  cal_set_log_callback(count_messages, &messages);
  char path[512];
  EXPECT(cal_run_forward(cfg, path, sizeof path) == CAL_OK);
  EXPECT(messages > 0);
  EXPECT(strstr(path, "dtn.json") != NULL);
  cal_set_log_callback(NULL, NULL);

  cal_dtn* map = NULL;
  EXPECT(cal_dtn_load(path, &map) == CAL_OK);
  double re = 0.0, im = 0.0;
  EXPECT(cal_dtn_entry(map, 1, 1, &re, &im) == CAL_OK);
  EXPECT(re > 1.0);
  cal_dtn_free(map);
  EXPECT(cal_dtn_load("/nonexistent/dtn.json", &map) == CAL_ERR_IO);

  double l2 = 0.0;
  EXPECT(cal_run_reconstruct(cfg, path, &l2) == CAL_OK);
  EXPECT(l2 >= 0.0 && l2 < 0.5);
  EXPECT(cal_config_set_stages(cfg, "traces") == CAL_OK);
  EXPECT(cal_run_reconstruct(cfg, path, &l2) == CAL_OK);
  EXPECT(isnan(l2));
  EXPECT(cal_run_reconstruct(cfg, "/nonexistent/dtn.json", NULL) == CAL_ERR_IO);
  cal_config_free(cfg);
}

int main(int argc, char** argv) {
  test_basics();
  test_config();
  test_unit_chain();
  test_pipeline(argc > 1 ? argv[1] : "capi_out");
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("all C API checks passed\n");
  return 0;
}
