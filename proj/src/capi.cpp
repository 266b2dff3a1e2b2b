#include <bergamot.h>

#include <cstdio>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include <bergamot/errors.hpp>
#include <bergamot/kernel.hpp>
#include <bergamot/metric.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/runner.hpp>
#include <bergamot/verify.hpp>
#include <bergamot/weight.hpp>

using namespace bergamot;

struct bgt_weight {
  Weight w;
};
struct bgt_radius {
  RadiusField rho;
};
struct bgt_kernel {
  KernelModel m;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
bgt_status guarded(F&& fn) {
  try {
    fn();
    return BGT_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<bgt_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BGT_E_INVALID;
  }
}

bgt_status null_arg() {
  g_last_error = "null argument";
  return BGT_E_INVALID;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void check_dim(int dim, int expected) {
  require(dim == expected, errc::invalid_argument,
          "dimension mismatch: got " + std::to_string(dim) + ", handle expects " +
              std::to_string(expected));
}

}  // namespace

extern "C" {

const char* bgt_version(void) { return "0.1.0"; }

const char* bgt_last_error(void) { return g_last_error.c_str(); }

bgt_status bgt_weight_create(const char* spec_json, bgt_weight** out) {
  if (!spec_json || !out) return null_arg();
  return guarded([&] { *out = new bgt_weight{make_weight_json(spec_json)}; });
}

void bgt_weight_free(bgt_weight* w) { delete w; }

int bgt_weight_n(const bgt_weight* w) { return w ? w->w.n() : 0; }

bgt_status bgt_weight_phi(const bgt_weight* w, const double* z, int dim, double* out) {
  if (!w || !z || !out) return null_arg();
  return guarded([&] {
    check_dim(dim, w->w.real_dim());
    *out = w->w.phi({z, static_cast<size_t>(dim)});
  });
}

bgt_status bgt_weight_grad(const bgt_weight* w, const double* z, int dim, double* out) {
  if (!w || !z || !out) return null_arg();
  return guarded([&] {
    check_dim(dim, w->w.real_dim());
    w->w.grad({z, static_cast<size_t>(dim)}, out);
  });
}

bgt_status bgt_weight_laplacian(const bgt_weight* w, const double* z, int dim, double* out) {
  if (!w || !z || !out) return null_arg();
  return guarded([&] {
    check_dim(dim, w->w.real_dim());
    *out = w->w.laplacian({z, static_cast<size_t>(dim)});
  });
}

bgt_status bgt_weight_inspect(const bgt_weight* w, char** json_out) {
  if (!w || !json_out) return null_arg();
  return guarded([&] { *json_out = dup_string(hypothesis_report_json(hypothesis_gate(w->w))); });
}

bgt_status bgt_radius_create(const bgt_weight* w, bgt_radius** out) {
  if (!w || !out) return null_arg();
  return guarded(
      [&] { *out = new bgt_radius{RadiusField::from_potential(w->w.laplacian_potential())}; });
}

void bgt_radius_free(bgt_radius* r) { delete r; }

bgt_status bgt_radius_eval(const bgt_radius* r, const double* x, int dim, double* out) {
  if (!r || !x || !out) return null_arg();
  return guarded([&] {
    check_dim(dim, r->rho.dim());
    *out = r->rho({x, static_cast<size_t>(dim)});
  });
}

bgt_status bgt_distance(const bgt_radius* r, const double* x, const double* y, int dim,
                        double* d, char* method, size_t method_cap) {
  if (!r || !x || !y || !d) return null_arg();
  return guarded([&] {
    check_dim(dim, r->rho.dim());
    const PairDistance pd =
        metric_distance(r->rho, {x, static_cast<size_t>(dim)}, {y, static_cast<size_t>(dim)});
    *d = pd.d;
    if (method && method_cap > 0) std::snprintf(method, method_cap, "%s", pd.method.c_str());
  });
}

bgt_status bgt_kernel_build(const bgt_weight* w, int degree, bgt_kernel** out) {
  if (!w || !out) return null_arg();
  return guarded([&] { *out = new bgt_kernel{build_kernel(w->w, degree)}; });
}

void bgt_kernel_free(bgt_kernel* k) { delete k; }

bgt_status bgt_kernel_eval(const bgt_kernel* k, const double* z, const double* w, int dim,
                           double* k_re, double* k_im, double* tail, int* tail_flag) {
  if (!k || !z || !w || !k_re || !k_im) return null_arg();
  return guarded([&] {
    check_dim(dim, 2 * k->m.n());
    const KernelValue kv =
        eval_kernel(k->m, {z, static_cast<size_t>(dim)}, {w, static_cast<size_t>(dim)});
    *k_re = kv.K.real();
    *k_im = kv.K.imag();
    if (tail) *tail = kv.tail;
    if (tail_flag) *tail_flag = kv.tail_flag ? 1 : 0;
  });
}

bgt_status bgt_run(const char* request_json, char** response_json) {
  if (!request_json || !response_json) return null_arg();
  return guarded([&] {
    const RunResult r = run_request(request_json);
    const nlohmann::json env = {{"exit_code", r.exit_code},
                                {"stdout", r.out},
                                {"error", r.error},
                                {"files", r.files}};
    *response_json = dup_string(env.dump(2));
  });
}

void bgt_string_free(char* s) { delete[] s; }

}  // extern "C"
