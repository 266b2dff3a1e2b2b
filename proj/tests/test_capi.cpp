#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <bergamot.h>
#include <json.hpp>

using doctest::Approx;

TEST_CASE("version string") { CHECK(std::string(bgt_version()) == "0.1.0"); }

TEST_CASE("weight lifecycle and evaluation") {
  bgt_weight* w = nullptr;
  REQUIRE(bgt_weight_create("{\"family\":\"fock\",\"n\":1}", &w) == BGT_OK);
  REQUIRE(w != nullptr);
  CHECK(bgt_weight_n(w) == 1);

  const double z[2] = {1.0, 1.0};
  double phi = 0;
  CHECK(bgt_weight_phi(w, z, 2, &phi) == BGT_OK);
  CHECK(phi == Approx(2.0).epsilon(1e-15));

  double grad[2] = {0, 0};
  CHECK(bgt_weight_grad(w, z, 2, grad) == BGT_OK);
  CHECK(grad[0] == Approx(2.0).epsilon(1e-14));
  CHECK(grad[1] == Approx(2.0).epsilon(1e-14));

  double lap = 0;
  CHECK(bgt_weight_laplacian(w, z, 2, &lap) == BGT_OK);
  CHECK(lap == Approx(4.0).epsilon(1e-14));

  // Wrong dimension: status, message, and untouched output.
  phi = -7;
  CHECK(bgt_weight_phi(w, z, 4, &phi) == BGT_E_INVALID);
  CHECK(phi == -7);
  CHECK(std::strlen(bgt_last_error()) > 0);

  char* report = nullptr;
  REQUIRE(bgt_weight_inspect(w, &report) == BGT_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("OPEN") != std::string::npos);
  const auto parsed = nlohmann::json::parse(report);
  CHECK(parsed.at("gate") == "OPEN");
  CHECK(parsed.at("comparability").at("delta_hat").get<double>() == Approx(0.25));
  bgt_string_free(report);
  bgt_weight_free(w);
}

TEST_CASE("weight creation failures") {
  bgt_weight* w = nullptr;
  CHECK(bgt_weight_create("{\"family\":\"nope\",\"n\":1}", &w) == BGT_E_INVALID);
  CHECK(w == nullptr);
  CHECK(bgt_weight_create("not json", &w) == BGT_E_INVALID);
  CHECK(bgt_weight_create(nullptr, &w) == BGT_E_INVALID);
  CHECK(bgt_weight_create("{\"family\":\"fock\",\"n\":1}", nullptr) == BGT_E_INVALID);

  const char* spec =
      "{\"family\":\"custom_radial\",\"n\":1,\"params\":{\"coeffs\":[0.0,-1.0,0.05]}}";
  CHECK(bgt_weight_create(spec, &w) == BGT_E_NOT_PSH);
  CHECK(std::string(bgt_last_error()).find("plurisubharmonic") != std::string::npos);
}

TEST_CASE("radius and distance") {
  bgt_weight* w = nullptr;
  REQUIRE(bgt_weight_create("{\"family\":\"radial_power\",\"n\":1,\"params\":{\"m\":2}}",
                            &w) == BGT_OK);
  bgt_radius* r = nullptr;
  REQUIRE(bgt_radius_create(w, &r) == BGT_OK);

  const double origin[2] = {0, 0};
  double rho = 0;
  CHECK(bgt_radius_eval(r, origin, 2, &rho) == BGT_OK);
  CHECK(rho == Approx(0.5).epsilon(1e-8));

  const double target[2] = {2, 0};
  double d = 0;
  char method[32] = {0};
  REQUIRE(bgt_distance(r, origin, target, 2, &d, method, sizeof method) == BGT_OK);
  CHECK(d == Approx(9.91577143017838974).epsilon(1e-8));
  CHECK(std::string(method) == "radial-quadrature");

  CHECK(bgt_radius_eval(r, origin, 4, &rho) == BGT_E_INVALID);
  bgt_radius_free(r);
  bgt_weight_free(w);
}

TEST_CASE("kernel evaluation") {
  bgt_weight* w = nullptr;
  REQUIRE(bgt_weight_create("{\"family\":\"fock\",\"n\":1}", &w) == BGT_OK);
  bgt_kernel* k = nullptr;
  REQUIRE(bgt_kernel_build(w, 16, &k) == BGT_OK);

  const double z[2] = {0, 0};
  double re = 0, im = 0, tail = 0;
  int flag = -1;
  REQUIRE(bgt_kernel_eval(k, z, z, 2, &re, &im, &tail, &flag) == BGT_OK);
  CHECK(re == Approx(2.0 / 3.14159265358979323846).epsilon(1e-10));
  CHECK(im == Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(flag == 0);

  CHECK(bgt_kernel_build(w, -3, &k) == BGT_E_INVALID);
  bgt_kernel_free(k);
  bgt_weight_free(w);
}

TEST_CASE("run request envelope") {
  char* response = nullptr;
  const std::string request = R"({"command":"weight-inspect","overrides":{"out":"capi_run_out"}})";
  REQUIRE(bgt_run(request.c_str(), &response) == BGT_OK);
  REQUIRE(response != nullptr);
  const auto env = nlohmann::json::parse(response);
  CHECK(env.at("exit_code").get<int>() == 0);
  CHECK(env.at("stdout").get<std::string>().find("gate=OPEN") != std::string::npos);
  CHECK_FALSE(env.at("files").empty());
  bgt_string_free(response);

  response = nullptr;
  REQUIRE(bgt_run("{\"command\":\"nope\"}", &response) == BGT_OK);
  const auto bad = nlohmann::json::parse(response);
  CHECK(bad.at("exit_code").get<int>() != 0);
  CHECK_FALSE(bad.at("error").get<std::string>().empty());
  bgt_string_free(response);

  CHECK(bgt_run(nullptr, &response) == BGT_E_INVALID);
}
