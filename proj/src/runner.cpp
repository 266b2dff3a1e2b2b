#include <bergamot/runner.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include <bergamot/errors.hpp>
#include <bergamot/forms.hpp>
#include <bergamot/io.hpp>
#include <bergamot/kernel.hpp>
#include <bergamot/metric.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/verify.hpp>
#include <bergamot/weight.hpp>

namespace bergamot {

namespace {

using nlohmann::json;

json default_config() {
  return json{
      {"family", "fock"},
      {"n", 1},
      {"m", 2},
      {"gamma", json::array()},
      {"coeffs", json::array()},
      {"powers", json::array()},
      {"box", 4.0},
      {"h", 0.1},
      {"degree", -1},  // -1 resolves to 64 (n=1) or 32 (n=2)
      {"quad_nodes", 32},
      {"kappa", {{"mode", "rho"}, {"scale", 1.0}, {"table", ""}}},
      {"window", {{"d_lo", 1.0}, {"d_hi", 6.0}, {"eps_min", 0.05}, {"log_margin", 0.5}}},
      {"out", "out"},
      {"deterministic", true},
      {"z", {0.0, 0.0}},
      {"w", {0.0, 0.0}},
      {"from", {0.0, 0.0}},
      {"to", {0.0, 0.0}},
  };
}

// Overlay with schema enforcement: a key unknown to the defaults is a config error,
// not a silent no-op.
void merge_config(json& base, const json& over, const std::string& prefix) {
  require(over.is_object(), errc::invalid_argument, "config must be a JSON object");
  for (auto& [k, v] : over.items()) {
    require(base.contains(k), errc::invalid_argument, "unknown config key: " + prefix + k);
    if (v.is_object() && base[k].is_object())
      merge_config(base[k], v, prefix + k + ".");
    else
      base[k] = v;
  }
}

Weight weight_from(const json& c) {
  WeightParams p;
  p.m = c.at("m").get<int>();
  for (const auto& g : c.at("gamma")) {
    require(g.is_array() && g.size() == 2, errc::invalid_argument,
            "gamma entries must be exponent pairs");
    p.gamma.push_back({g.at(0).get<int>(), g.at(1).get<int>()});
  }
  for (const auto& x : c.at("coeffs")) p.coeffs.push_back(x.get<double>());
  for (const auto& x : c.at("powers")) p.powers.push_back(x.get<int>());
  return make_weight(family_from_name(c.at("family").get<std::string>()), c.at("n").get<int>(),
                     p);
}

Pt point_from(const json& c, const char* key, int dim) {
  const json& a = c.at(key);
  require(a.is_array() && static_cast<int>(a.size()) == dim, errc::invalid_argument,
          std::string(key) + " must have " + std::to_string(dim) + " coordinates");
  Pt p;
  for (const auto& x : a) p.push_back(x.get<double>());
  return p;
}

KappaSpec kappa_from(const json& c) {
  const json& k = c.at("kappa");
  KappaSpec ks;
  const std::string mode = k.at("mode").get<std::string>();
  if (mode == "rho") {
    ks.mode = KappaMode::rho;
  } else if (mode == "scaled") {
    ks.mode = KappaMode::scaled;
    ks.scale = k.at("scale").get<double>();
  } else if (mode == "table") {
    ks.mode = KappaMode::table;
    const std::string path = k.at("table").get<std::string>();
    require(!path.empty(), errc::invalid_argument, "kappa table mode needs a table path");
    json t = json::parse(read_file(path), nullptr, false);
    require(!t.is_discarded() && t.contains("t") && t.contains("v"), errc::invalid_argument,
            "kappa table file must be JSON with arrays t and v");
    for (const auto& x : t.at("t")) ks.t.push_back(x.get<double>());
    for (const auto& x : t.at("v")) ks.v.push_back(x.get<double>());
  } else {
    fail(errc::invalid_argument, "kappa mode must be rho, scaled, or table");
  }
  return ks;
}

int resolve_degree(const json& c, int n) {
  const int d = c.at("degree").get<int>();
  if (d >= 0) return d;
  return n == 1 ? 64 : 32;
}

void validate_config(const json& c) {
  require(c.at("box").get<double>() > 0, errc::invalid_argument, "box must be positive");
  require(c.at("h").get<double>() > 0, errc::invalid_argument, "h must be positive");
  require(c.at("quad_nodes").get<int>() > 0, errc::invalid_argument,
          "quad_nodes must be positive");
  require(c.at("degree").get<int>() >= -1, errc::invalid_argument,
          "degree must be -1 (auto) or nonnegative");
}

std::string fmt_g(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

json pt_json(const Pt& p) {
  json a = json::array();
  for (double x : p) a.push_back(x);
  return a;
}

json hypothesis_json(const HypothesisReport& rep) {
  return json{
      {"n", rep.n},
      {"family", rep.family},
      {"sup_mode", rep.sup_mode},
      {"gate", rep.gate_open ? "OPEN" : "CLOSED"},
      {"gate_open", rep.gate_open},
      {"comparability",
       {{"delta_hat", rep.comparability.delta_hat},
        {"argmin", pt_json(rep.comparability.argmin)},
        {"skipped", rep.comparability.skipped}}},
      {"doubling",
       {{"D_hat", rep.doubling.D_hat},
        {"arg_center", pt_json(rep.doubling.arg_center)},
        {"arg_r", rep.doubling.arg_r}}},
      {"reverse_holder",
       {{"A_hat", rep.reverse_holder.A_hat}, {"finite", rep.reverse_holder.finite}}},
      {"admissibility",
       {{"c", rep.admissibility.c},
        {"inf_sup", rep.admissibility.inf_sup},
        {"D_hat", rep.admissibility.D_hat},
        {"admissible", rep.admissibility.admissible}}},
      {"notes", rep.notes},
  };
}

struct CommandOutput {
  std::string stdout_payload;  // JSON payloads printed before the summary, if any
  std::string summary;
  std::vector<OutputFile> files;
};

CommandOutput cmd_weight_inspect(const json& cfg, int* exit_code) {
  const Weight w = weight_from(cfg);
  const HypothesisReport rep = hypothesis_gate(w);
  const json j = hypothesis_json(rep);
  CommandOutput out;
  out.stdout_payload = j.dump(2) + "\n";
  if (rep.gate_open) {
    out.summary = "weight inspect OK gate=OPEN delta_hat=" +
                  fmt_g(rep.comparability.delta_hat, 6) + " D_hat=" +
                  fmt_g(rep.doubling.D_hat, 6);
  } else {
    out.summary = "weight inspect FAIL gate=CLOSED";
    *exit_code = 2;
  }
  out.files.push_back({"hypothesis.json", j.dump(2) + "\n"});
  return out;
}

CommandOutput cmd_radius(const json& cfg) {
  const Weight w = weight_from(cfg);
  const RadiusField rho = RadiusField::from_potential(w.laplacian_potential());
  const double box = cfg.at("box").get<double>();
  const double h = cfg.at("h").get<double>();

  std::vector<std::vector<std::string>> rows;
  Pt p(static_cast<size_t>(w.real_dim()), 0.0);
  const int steps = static_cast<int>(std::floor(box / h + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    p[0] = i * h;
    rows.push_back({fmt_g17(p[0]), fmt_g17(rho(p))});
  }
  Pt origin(static_cast<size_t>(w.real_dim()), 0.0);
  const double rho0 = rho(origin);

  CommandOutput out;
  const json j = {{"rho_at_origin", rho0},
                  {"provenance", provenance_name(rho.provenance())},
                  {"dim", rho.dim()},
                  {"probes", steps + 1}};
  out.files.push_back({"radius.json", j.dump(2) + "\n"});
  out.files.push_back({"radius.csv", csv_table({"t", "rho"}, rows)});
  out.summary = "radius OK rho0=" + fmt_g(rho0, 6);
  return out;
}

CommandOutput cmd_distance(const json& cfg) {
  const Weight w = weight_from(cfg);
  const RadiusField rho = RadiusField::from_potential(w.laplacian_potential());
  const Pt a = point_from(cfg, "from", w.real_dim());
  const Pt b = point_from(cfg, "to", w.real_dim());
  const PairDistance pd = metric_distance(rho, a, b);

  CommandOutput out;
  const json j = {{"d", pd.d}, {"method", pd.method}, {"from", pt_json(a)}, {"to", pt_json(b)}};
  out.stdout_payload = j.dump(2) + "\n";
  out.files.push_back({"distance.json", j.dump(2) + "\n"});
  out.summary = "distance OK d=" + fmt_g(pd.d, 6) + " method=" + pd.method;
  return out;
}

CommandOutput cmd_kernel(const json& cfg) {
  const Weight w = weight_from(cfg);
  const KernelModel model = build_kernel(w, resolve_degree(cfg, w.n()));
  const Pt z = point_from(cfg, "z", w.real_dim());
  const Pt zw = point_from(cfg, "w", w.real_dim());
  const KernelValue kv = eval_kernel(model, z, zw);

  CommandOutput out;
  const json j = {{"K_re", kv.K.real()},
                  {"K_im", kv.K.imag()},
                  {"abs_K", std::abs(kv.K)},
                  {"degree", model.degree()},
                  {"tail", kv.tail},
                  {"tail_flag", kv.tail_flag},
                  {"validated_radius", model.validated_radius()},
                  {"z", pt_json(z)},
                  {"w", pt_json(zw)}};
  out.files.push_back({"kernel.json", j.dump(2) + "\n"});
  out.summary = "kernel OK K=" + fmt_g(std::abs(kv.K), 7);
  if (kv.tail_flag) out.summary += " tail_flag=1";
  return out;
}

CommandOutput cmd_coercivity(const json& cfg) {
  const Weight w = weight_from(cfg);
  const double box = cfg.at("box").get<double>();
  const double h = cfg.at("h").get<double>();
  const FormGrid g = make_form_grid(w, Box::cube(w.real_dim(), box), h);
  const FormOperators ops = assemble_mkh(g);
  const CoercivityResult res = coercivity_rayleigh(ops);

  CommandOutput out;
  const json j = {{"lambda", res.lambda},
                  {"outer_iters", res.outer_iters},
                  {"cg_iters", res.cg_iters},
                  {"residual", res.residual},
                  {"grid", {{"box", box}, {"h", h}, {"interior", ops.m}, {"n", g.n}}}};
  out.files.push_back({"coercivity.json", j.dump(2) + "\n"});
  out.summary = "coercivity OK lambda=" + fmt_g(res.lambda, 6);
  return out;
}

CommandOutput cmd_verify(const json& cfg) {
  const Weight w = weight_from(cfg);
  const HypothesisReport gate = hypothesis_gate(w);
  const KernelModel model = build_kernel(w, resolve_degree(cfg, w.n()));
  const RadiusField rho = RadiusField::from_potential(w.laplacian_potential());
  const KappaSpec ks = kappa_from(cfg);
  const json& win = cfg.at("window");
  const double d_lo = win.at("d_lo").get<double>();
  const double d_hi = win.at("d_hi").get<double>();
  const double eps_min = win.at("eps_min").get<double>();
  const double log_margin = win.at("log_margin").get<double>();

  const auto pairs = default_pairs(rho, w.n(), d_hi);
  const BoundReport rep = verify_bound(model, rho, ks, pairs, d_lo, d_hi, eps_min, log_margin);

  const int dim = w.real_dim();
  std::vector<std::string> header;
  for (int k = 1; k <= dim; ++k) header.push_back("z" + std::to_string(k));
  for (int k = 1; k <= dim; ++k) header.push_back("w" + std::to_string(k));
  for (const char* name : {"abs_k", "tail", "tail_flag", "phi_z", "phi_w", "rho_z", "rho_w",
                           "kappa_z", "d", "method", "log_q", "q"})
    header.push_back(name);
  std::vector<std::vector<std::string>> rows;
  for (const PairRow& r : rep.rows) {
    std::vector<std::string> cells;
    for (double x : r.z) cells.push_back(fmt_g17(x));
    for (double x : r.w) cells.push_back(fmt_g17(x));
    cells.push_back(fmt_g17(r.abs_k));
    cells.push_back(fmt_g17(r.tail));
    cells.push_back(r.tail_flag ? "1" : "0");
    cells.push_back(fmt_g17(r.phi_z));
    cells.push_back(fmt_g17(r.phi_w));
    cells.push_back(fmt_g17(r.rho_z));
    cells.push_back(fmt_g17(r.rho_w));
    cells.push_back(fmt_g17(r.kappa_z));
    cells.push_back(fmt_g17(r.d));
    cells.push_back(r.method);
    cells.push_back(fmt_g17(r.log_q));
    cells.push_back(fmt_g17(r.q));
    rows.push_back(std::move(cells));
  }

  // Plot data sorted by distance; the fitted-line column makes the envelope check
  // reproducible by eye in any plotter.
  std::vector<size_t> order(rep.rows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return rep.rows[i].d < rep.rows[j].d; });
  std::vector<std::vector<std::string>> plot;
  for (size_t i : order) {
    const PairRow& r = rep.rows[i];
    plot.push_back(
        {fmt_g17(r.d), fmt_g17(r.log_q), fmt_g17(rep.log_c_hat + rep.slope * r.d)});
  }

  const json j = {
      {"gate", hypothesis_json(gate)},
      {"exploratory", !gate.gate_open},
      {"degree", model.degree()},
      {"validated_radius", model.validated_radius()},
      {"window",
       {{"d_lo", rep.d_lo}, {"d_hi", rep.d_hi}, {"eps_min", rep.eps_min},
        {"log_margin", rep.log_margin}}},
      {"fit",
       {{"slope", rep.slope},
        {"eps_hat", rep.eps_hat},
        {"log_c_hat", rep.log_c_hat},
        {"max_resid", rep.max_resid},
        {"window_pairs", rep.window_pairs},
        {"pass", rep.pass}}},
      {"kappa_substituted", rep.kappa_substituted},
      {"pairs", rep.rows.size()},
  };

  CommandOutput out;
  out.files.push_back({"report.json", j.dump(2) + "\n"});
  out.files.push_back({"pairs.csv", csv_table(header, rows)});
  out.files.push_back({"plotdata.csv", csv_table({"d", "log_q", "fitted"}, plot)});
  out.summary = std::string("verify OK eps=") + fmt_g(rep.eps_hat, 6) + " slope=" +
                fmt_g(rep.slope, 6) + " verdict=" + (rep.pass ? "PASS" : "FAIL") + " gate=" +
                (gate.gate_open ? "OPEN" : "CLOSED");
  return out;
}

}  // namespace

std::string hypothesis_report_json(const HypothesisReport& rep) {
  return hypothesis_json(rep).dump(2) + "\n";
}

RunResult run_request(const std::string& request_json) {
  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    json req = json::parse(request_json, nullptr, false);
    require(!req.is_discarded() && req.is_object(), errc::invalid_argument,
            "request must be a JSON object");
    require(req.contains("command"), errc::invalid_argument, "request needs a command");
    const std::string cmd = req.at("command").get<std::string>();

    json cfg = default_config();
    if (req.contains("config") && !req.at("config").get<std::string>().empty()) {
      json file = json::parse(read_file(req.at("config").get<std::string>()), nullptr, false);
      require(!file.is_discarded(), errc::invalid_argument, "config file is not valid JSON");
      merge_config(cfg, file, "");
    }
    if (req.contains("overrides")) merge_config(cfg, req.at("overrides"), "");
    validate_config(cfg);

    CommandOutput out;
    if (cmd == "weight-inspect") {
      out = cmd_weight_inspect(cfg, &result.exit_code);
    } else if (cmd == "radius") {
      out = cmd_radius(cfg);
    } else if (cmd == "distance") {
      out = cmd_distance(cfg);
    } else if (cmd == "kernel") {
      out = cmd_kernel(cfg);
    } else if (cmd == "coercivity") {
      out = cmd_coercivity(cfg);
    } else if (cmd == "verify") {
      out = cmd_verify(cfg);
    } else {
      fail(errc::invalid_argument, "unknown command: " + cmd);
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"command", cmd},
                     {"config", cfg},
                     {"config_hash", "fnv1a64:" + hex64(fnv1a64(cfg.dump()))},
                     {"versions", {{"bergamot", "0.1.0"}}},
                     {"outputs", json::object()},
                     {"wall_time_s", wall}};
    for (const OutputFile& f : out.files)
      manifest["outputs"][f.name] = {{"bytes", f.content.size()},
                                     {"fnv1a64", hex64(fnv1a64(f.content))}};
    std::vector<OutputFile> files = out.files;
    files.push_back({"manifest.json", manifest.dump(2) + "\n"});

    const std::string dir = cfg.at("out").get<std::string>();
    write_outputs(dir, files);
    for (const OutputFile& f : files) result.files.push_back(dir + "/" + f.name);

    result.out = out.stdout_payload + out.summary + "\n";
  } catch (const Error& e) {
    result.exit_code =
        (e.code() == errc::not_plurisubharmonic || e.code() == errc::hypothesis_failed) ? 2 : 1;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace bergamot
