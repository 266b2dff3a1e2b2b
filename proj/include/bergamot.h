#ifndef BERGAMOT_H
#define BERGAMOT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Stable C interface of the bergamot shared library: opaque handles plus status
 * codes. All functions returning bgt_status leave outputs untouched on failure and
 * record a message readable through bgt_last_error() (thread-local). */

typedef enum {
  BGT_OK = 0,
  BGT_E_INVALID = 1,       /* malformed argument or spec */
  BGT_E_NOT_PSH = 2,       /* weight is not plurisubharmonic */
  BGT_E_HYPOTHESIS = 3,    /* hypothesis scan failed or is degenerate */
  BGT_E_NUMERICAL = 4,     /* divergence, non-convergence, or underflow */
  BGT_E_IO = 5             /* file system failure */
} bgt_status;

const char* bgt_version(void);
const char* bgt_last_error(void);

typedef struct bgt_weight bgt_weight;
typedef struct bgt_radius bgt_radius;
typedef struct bgt_kernel bgt_kernel;

/* Weight from a JSON spec, e.g. {"family":"fock","n":1} or
 * {"family":"radial_power","n":1,"params":{"m":2}}. */
bgt_status bgt_weight_create(const char* spec_json, bgt_weight** out);
void bgt_weight_free(bgt_weight* w);
int bgt_weight_n(const bgt_weight* w);
/* dim must equal 2n; grad output has length dim. */
bgt_status bgt_weight_phi(const bgt_weight* w, const double* z, int dim, double* out);
bgt_status bgt_weight_grad(const bgt_weight* w, const double* z, int dim, double* out);
bgt_status bgt_weight_laplacian(const bgt_weight* w, const double* z, int dim, double* out);
/* Hypothesis scan over the default probe set; JSON report, free with bgt_string_free. */
bgt_status bgt_weight_inspect(const bgt_weight* w, char** json_out);

/* Radius field rho_V for V = laplacian of the weight. */
bgt_status bgt_radius_create(const bgt_weight* w, bgt_radius** out);
void bgt_radius_free(bgt_radius* r);
bgt_status bgt_radius_eval(const bgt_radius* r, const double* x, int dim, double* out);
/* Metric distance between two points; the method tag ("radial-quadrature" or
 * "segment-quadrature") is copied into method when method_cap > 0. */
bgt_status bgt_distance(const bgt_radius* r, const double* x, const double* y, int dim,
                        double* d, char* method, size_t method_cap);

/* Truncated kernel model of total degree <= degree. */
bgt_status bgt_kernel_build(const bgt_weight* w, int degree, bgt_kernel** out);
void bgt_kernel_free(bgt_kernel* k);
bgt_status bgt_kernel_eval(const bgt_kernel* k, const double* z, const double* w, int dim,
                           double* k_re, double* k_im, double* tail, int* tail_flag);

/* Full pipeline runner behind the CLI. Request JSON:
 *   {"command": "weight-inspect|radius|distance|kernel|coercivity|verify",
 *    "config": "<path or empty>", "overrides": { ... partial config ... }}
 * Response JSON (free with bgt_string_free):
 *   {"exit_code": int, "stdout": "...", "error": "...", "files": ["..."]} */
bgt_status bgt_run(const char* request_json, char** response_json);

void bgt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* BERGAMOT_H */
