#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <bergamot.h>

namespace {

using nlohmann::json;

json parse_csv_numbers(const std::string& text, const char* flag) {
  json arr = json::array();
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(cur, &used);
      if (used != cur.size()) throw std::invalid_argument(cur);
      arr.push_back(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "expected comma-separated numbers, got '" + text + "'");
    }
  }
  if (arr.empty()) throw CLI::ValidationError(flag, "expected comma-separated numbers");
  return arr;
}

json parse_int_pair(const std::string& text, const char* flag) {
  const json nums = parse_csv_numbers(text, flag);
  if (nums.size() != 2) throw CLI::ValidationError(flag, "expected a pair a,b");
  return json::array({static_cast<int>(nums[0].get<double>()),
                      static_cast<int>(nums[1].get<double>())});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bergamot: weighted Bergman kernels, Agmon metrics, and decay verification"};
  app.set_help_flag("--help", "print help");  // frees -h/--h for the grid spacing flag
  app.require_subcommand(1);

  json overrides = json::object();
  std::string config_path;

  auto add_common = [&](CLI::App* c) {
    c->set_help_flag("--help", "print help");
    c->add_option_function<std::string>(
        "--family,--weight", [&](const std::string& v) { overrides["family"] = v; },
        "weight family: fock | radial_power | gamma_monomials | decoupled | custom_radial");
    c->add_option_function<int>(
        "--n", [&](const int& v) { overrides["n"] = v; }, "complex dimension (1 or 2)");
    c->add_option_function<int>(
        "--m", [&](const int& v) { overrides["m"] = v; }, "radial power exponent");
    c->add_option_function<std::vector<std::string>>(
        "--gamma",
        [&](const std::vector<std::string>& vs) {
          json arr = json::array();
          for (const auto& v : vs) arr.push_back(parse_int_pair(v, "--gamma"));
          overrides["gamma"] = arr;
        },
        "monomial exponent pair a,b (repeatable)");
    c->add_option_function<std::string>(
        "--coeffs",
        [&](const std::string& v) { overrides["coeffs"] = parse_csv_numbers(v, "--coeffs"); },
        "comma-separated coefficients");
    c->add_option_function<std::string>(
        "--powers",
        [&](const std::string& v) {
          json arr = json::array();
          for (const auto& x : parse_csv_numbers(v, "--powers"))
            arr.push_back(static_cast<int>(x.get<double>()));
          overrides["powers"] = arr;
        },
        "comma-separated per-variable powers (decoupled family)");
    c->add_option_function<double>(
        "--box", [&](const double& v) { overrides["box"] = v; }, "box half-width L");
    c->add_option_function<double>(
        "--h", [&](const double& v) { overrides["h"] = v; }, "grid spacing");
    c->add_option_function<int>(
        "--degree", [&](const int& v) { overrides["degree"] = v; },
        "kernel truncation degree (-1 = auto)");
    c->add_option_function<std::string>(
        "--kappa",
        [&](const std::string& v) {
          if (v == "rho") {
            overrides["kappa"] = {{"mode", "rho"}};
          } else if (v.rfind("scale:", 0) == 0) {
            try {
              overrides["kappa"] = {{"mode", "scaled"}, {"scale", std::stod(v.substr(6))}};
            } catch (const std::exception&) {
              throw CLI::ValidationError("--kappa", "scale:<c> needs a numeric factor");
            }
          } else if (v.rfind("table:", 0) == 0) {
            overrides["kappa"] = {{"mode", "table"}, {"table", v.substr(6)}};
          } else {
            throw CLI::ValidationError("--kappa", "expected rho, scale:<c>, or table:<path>");
          }
        },
        "localization radius: rho | scale:<c> | table:<path>");
    c->add_option_function<std::string>(
        "--out", [&](const std::string& v) { overrides["out"] = v; }, "output directory");
    c->add_option("--config", config_path, "JSON config file (flags take precedence)");
  };

  auto* weight_cmd = app.add_subcommand("weight", "weight-level reports");
  weight_cmd->require_subcommand(1);
  auto* inspect_cmd =
      weight_cmd->add_subcommand("inspect", "hypothesis scans and the admissibility gate");
  auto* radius_cmd = app.add_subcommand("radius", "radius field rho_V along the first axis");
  auto* distance_cmd = app.add_subcommand("distance", "metric distance between two points");
  auto* kernel_cmd = app.add_subcommand("kernel", "kernel model evaluation at a pair");
  auto* coercivity_cmd =
      app.add_subcommand("coercivity", "generalized Rayleigh minimum of the discrete form");
  auto* verify_cmd = app.add_subcommand("verify", "exponential decay bound verification");

  for (CLI::App* c : {inspect_cmd, radius_cmd, distance_cmd, kernel_cmd, coercivity_cmd,
                      verify_cmd})
    add_common(c);

  distance_cmd->add_option_function<std::string>(
      "--from",
      [&](const std::string& v) { overrides["from"] = parse_csv_numbers(v, "--from"); },
      "start point coordinates");
  distance_cmd->add_option_function<std::string>(
      "--to", [&](const std::string& v) { overrides["to"] = parse_csv_numbers(v, "--to"); },
      "end point coordinates");
  kernel_cmd->add_option_function<std::string>(
      "--z", [&](const std::string& v) { overrides["z"] = parse_csv_numbers(v, "--z"); },
      "first argument coordinates");
  kernel_cmd->add_option_function<std::string>(
      "--w", [&](const std::string& v) { overrides["w"] = parse_csv_numbers(v, "--w"); },
      "second argument coordinates");

  CLI11_PARSE(app, argc, argv);

  std::string command;
  if (inspect_cmd->parsed()) command = "weight-inspect";
  else if (radius_cmd->parsed()) command = "radius";
  else if (distance_cmd->parsed()) command = "distance";
  else if (kernel_cmd->parsed()) command = "kernel";
  else if (coercivity_cmd->parsed()) command = "coercivity";
  else command = "verify";

  const json request = {{"command", command}, {"config", config_path}, {"overrides", overrides}};

  char* response = nullptr;
  const bgt_status st = bgt_run(request.dump().c_str(), &response);
  if (st != BGT_OK) {
    std::fprintf(stderr, "error: %s\n", bgt_last_error());
    return 1;
  }
  const json env = json::parse(response);
  bgt_string_free(response);

  const std::string out = env.at("stdout").get<std::string>();
  if (!out.empty()) std::fputs(out.c_str(), stdout);
  const std::string err = env.at("error").get<std::string>();
  if (!err.empty()) std::fprintf(stderr, "error: %s\n", err.c_str());
  return env.at("exit_code").get<int>();
}
