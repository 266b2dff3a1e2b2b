#include <bergamot.h>
#include <stdio.h>
#include <math.h>

int main(void) {
  bgt_weight* w = NULL;
  if (bgt_weight_create("{\"family\":\"fock\",\"n\":1}", &w) != BGT_OK) return 1;

  bgt_kernel* k = NULL;
  if (bgt_kernel_build(w, 64, &k) != BGT_OK) return 2;
  double z[2] = {0.0, 0.0}, p[2] = {0.0, 0.0};
  double re, im, tail; int clipped;
  if (bgt_kernel_eval(k, z, p, 2, &re, &im, &tail, &clipped) != BGT_OK) return 3;
  if (fabs(re - 2.0 / M_PI) > 1e-12 || fabs(im) > 1e-12 || clipped) return 4;

  bgt_radius* r = NULL;
  if (bgt_radius_create(w, &r) != BGT_OK) return 5;
  double q[2] = {2.0, 0.0}, d;
  char method[32];
  if (bgt_distance(r, z, q, 2, &d, method, sizeof method) != BGT_OK) return 6;

  bgt_weight* bad = NULL;
  if (bgt_weight_create("{\"family\":\"banana\"}", &bad) != BGT_E_INVALID) return 7;
  if (!bgt_last_error()[0]) return 8;

  char* resp = NULL;
  if (bgt_run("{\"command\":\"kernel\",\"overrides\":{\"family\":\"fock\",\"n\":1,"
              "\"degree\":32,\"z\":[0.3,0.0],\"w\":[0.0,0.3]}}", &resp) != BGT_OK) return 9;
  printf("run response: %.60s...\n", resp);
  bgt_string_free(resp);

  printf("capi smoke OK: K(0,0)=%.12f d=%.6f method=%s version=%s\n", re, d, method, bgt_version());
  bgt_kernel_free(k); bgt_radius_free(r); bgt_weight_free(w);
  return 0;
}
