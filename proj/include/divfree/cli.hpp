#pragma once

// Batch front end. run() parses arguments, calls the library and serializes a
// report; it holds no numerics of its own. Exit status: 0 success, 1 usage or
// input error, 2 a verification check came out above tolerance.

#include "divfree/divfree.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace divfree::cli {

using nlohmann::json;

/// Raised for malformed inputs that are not caught by the library itself.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string model;
  std::string params;
  std::string state;
  std::string field;
  std::string metric;
  std::string metric_path;
  std::uint64_t seed = 1;
  std::string tol;
  double h = 0.125;
  int refine = 0;
  double eps = 1e-3;
  int n_states = 100;
  std::string out;
  std::string output = "json";
};

namespace detail {

inline json read_json_arg(const std::string& text) {
  if (text.empty()) throw InputError("missing --state");
  std::string body = text;
  const std::filesystem::path p(text);
  if (text.front() != '{' && text.front() != '[' && std::filesystem::exists(p)) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("state is not valid JSON: ") + e.what());
  }
}

inline std::vector<double> vec(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("state is missing '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw InputError(std::string("state field '") + key + "' must be a number array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InputError(std::string("state field '") + key + "' must be a number array");
    out.push_back(x.get<double>());
  }
  return out;
}

inline Vec3 vec3(const json& j, const char* key) {
  const auto v = vec(j, key);
  if (v.size() != 3) throw InputError(std::string("state field '") + key + "' needs 3 entries");
  return {v[0], v[1], v[2]};
}

inline double number(const json& j, const char* key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) throw InputError(std::string("state field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

/// Gas and relativistic models take n from the state when it is not given.
inline void infer_space_dim(const std::string& model, Params& params, const json& state) {
  if (params.count("n") || !state.is_object()) return;
  const bool gas = model.rfind("gas", 0) == 0;
  const bool rel = model.rfind("relativistic", 0) == 0;
  if (gas && state.contains("q") && state.at("q").is_array()) {
    params["n"] = std::to_string(state.at("q").size());
  } else if (rel && state.contains("m") && state.at("m").is_array() && !state.at("m").empty()) {
    params["n"] = std::to_string(state.at("m").size() - 1);
  }
}

/// Family-specific JSON ({rho,q,s}, {m,s}, {E,B,s}) or generic {A, s}.
inline PFormValue parse_state(const LagrangianModel& model, const json& j) {
  if (!j.is_object()) throw InputError("state must be a JSON object");
  std::optional<double> s;
  if (j.contains("s")) s = number(j, "s", 0.0);
  if (model.uses_entropy && !s) s = 0.0;
  PFormValue a(model.dim, model.degree);
  if (j.contains("A")) {
    const auto c = vec(j, "A");
    if (static_cast<int>(c.size()) != model.size()) {
      throw InputError("state 'A' needs " + std::to_string(model.size()) + " coefficients");
    }
    a.coeffs = c;
  } else if (std::holds_alternative<GasFamily>(model.family)) {
    GasState st{number(j, "rho", 1.0), vec(j, "q"), s.value_or(0.0)};
    if (static_cast<int>(st.q.size()) != model.dim - 1) throw InputError("state 'q' has the wrong length");
    a = encode_gas(st);
  } else if (std::holds_alternative<RelativisticFamily>(model.family)) {
    const auto m = vec(j, "m");
    if (static_cast<int>(m.size()) != model.dim) throw InputError("state 'm' has the wrong length");
    a = encode_nform(m);
  } else if (std::holds_alternative<MaxwellFamily>(model.family)) {
    a = encode_em(EMState{vec3(j, "E"), vec3(j, "B"), 0.0});
  } else if (model.degree == model.dim - 1 && j.contains("m")) {
    const auto m = vec(j, "m");
    if (static_cast<int>(m.size()) != model.dim) throw InputError("state 'm' has the wrong length");
    a = encode_nform(m);
  } else {
    throw InputError("state for model " + model.name + " needs 'A' (coefficients in storage order)");
  }
  a.entropy = s;
  if (!model.uses_entropy && !j.contains("s")) a.entropy.reset();
  return a;
}

inline std::map<std::string, double> parse_tolerances(const std::string& text) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : parse_params(text)) {
    try {
      std::size_t used = 0;
      out[k] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw InputError("tolerance " + k + " is not a number");
    }
  }
  return out;
}

inline double tol_or(const std::map<std::string, double>& t, const std::string& k, double def) {
  const auto it = t.find(k);
  return it == t.end() ? def : it->second;
}

inline MetricSignature pick_metric(const LagrangianModel& model, const RunConfig& cfg) {
  if (cfg.metric.empty()) {
    return model.metric_hint ? MetricSignature(*model.metric_hint) : MetricSignature::euclidean(model.dim);
  }
  if (cfg.metric == "euclidean") return MetricSignature::euclidean(model.dim);
  if (cfg.metric == "minkowski") {
    double c = 1.0;
    if (const auto* rel = std::get_if<RelativisticFamily>(&model.family)) c = rel->c;
    return MetricSignature::minkowski(model.dim, c);
  }
  if (cfg.metric == "custom") {
    if (cfg.metric_path.empty()) throw InputError("--metric custom needs a matrix file path");
    std::ifstream in(cfg.metric_path);
    if (!in) throw InputError("cannot open metric file " + cfg.metric_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("metric file is not valid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("S")) j = j.at("S");
    if (!j.is_array() || static_cast<int>(j.size()) != model.dim) throw InputError("metric must be a d x d array");
    Matrix S(model.dim, model.dim);
    for (int r = 0; r < model.dim; ++r) {
      if (!j[r].is_array() || static_cast<int>(j[r].size()) != model.dim) throw InputError("metric must be a d x d array");
      for (int c = 0; c < model.dim; ++c) S(r, c) = j[r][c].get<double>();
    }
    return MetricSignature(S);
  }
  throw InputError("unknown metric '" + cfg.metric + "'");
}

inline json vec_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }
inline json vec_json(const Vec3& v) { return json(std::vector<double>(v.begin(), v.end())); }

inline json params_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline json state_json(const PFormValue& a) {
  json j{{"A", a.coeffs}};
  if (a.entropy) j["s"] = *a.entropy;
  return j;
}

// ---------------------------------------------------------------------------

inline int cmd_models(json& report) {
  json list = json::array();
  for (const ModelInfo& info : registered_models()) {
    json e{{"name", info.name}, {"description", info.description}, {"defaults", info.defaults}};
    if (info.name == "user-expr") {
      e["d"] = nullptr;
      e["p"] = nullptr;
      e["metric_hint"] = nullptr;
    } else {
      const LagrangianModel m = make_model(info.name);
      e["d"] = m.dim;
      e["p"] = m.degree;
      e["uses_entropy"] = m.uses_entropy;
      e["metric_hint"] = m.metric_hint ? matrix_json(*m.metric_hint) : json(nullptr);
    }
    list.push_back(e);
  }
  report["models"] = list;
  return 0;
}

inline int cmd_tensor(const RunConfig& cfg, json& report) {
  const json sj = read_json_arg(cfg.state);
  Params params = parse_params(cfg.params);
  infer_space_dim(cfg.model, params, sj);
  const LagrangianModel model = make_model(cfg.model, params);
  const PFormValue a = parse_state(model, sj);
  const TensorValue tv = assemble_general(model, a);

  report["model"] = model.name;
  report["params"] = params_json(params);
  report["d"] = model.dim;
  report["p"] = model.degree;
  report["state"] = state_json(a);
  report["L"] = model.evaluate(a);
  report["gradient"] = model.gradient(a);
  report["T"] = matrix_json(tv.T);
  if (tv.metric) {
    report["metric"] = matrix_json(*tv.metric);
    report["symmetry_defect"] = symmetry_defect(tv, *tv.metric);
  }

  json spec = json::object();
  if (const auto* gas = std::get_if<GasFamily>(&model.family)) {
    const GasTensors gt = assemble_gas(gas->g, decode_gas(a));
    spec = {{"T", matrix_json(gt.T)}, {"T_prime", matrix_json(gt.T_prime)}, {"pressure", gt.pressure}};
  } else if (const auto* rel = std::get_if<RelativisticFamily>(&model.family)) {
    const RelativisticTensors rt = assemble_relativistic(rel->rest, {decode_nform(a), rel->c, a.entropy_or_zero()});
    spec = {{"T", matrix_json(rt.T)},
            {"T_prime", matrix_json(rt.T_prime)},
            {"rho", rt.thermo.rho},
            {"e", rt.thermo.e},
            {"pressure", rt.thermo.p},
            {"limit_case", rel->limit_case}};
    if (rel->kappa) spec["ultrarelativistic"] = ultrarelativistic(*rel->kappa);
  } else if (const auto* em = std::get_if<MaxwellFamily>(&model.family)) {
    const EMState st = decode_em(a);
    const MaxwellTensors mt = assemble_maxwell(em->density, st);
    spec = {{"T", matrix_json(mt.T)},     {"T_tilde", matrix_json(mt.T_tilde)}, {"E", vec_json(st.E)},
            {"B", vec_json(st.B)},        {"D", vec_json(mt.aux.D)},            {"H", vec_json(mt.aux.H)},
            {"W", mt.aux.W},              {"pfaffian", pfaffian_2form(a)}};
  }
  if (model.degree == model.dim - 1) {
    const auto m = decode_nform(a);
    spec["T_nform"] = matrix_json(assemble_nform(model, m, a.entropy_or_zero()).T);
    spec["m"] = m;
  }
  if (!spec.empty()) report["specialized"] = spec;
  return 0;
}

inline int cmd_invariance(const RunConfig& cfg, json& report) {
  const Params params = parse_params(cfg.params);
  const LagrangianModel model = make_model(cfg.model, params);
  const MetricSignature S = pick_metric(model, cfg);
  const auto tols = parse_tolerances(cfg.tol);
  Tolerances tol;
  tol.invariant = tol_or(tols, "invariant", tol.invariant);
  tol.not_invariant = tol_or(tols, "not_invariant", tol.not_invariant);
  const Theorem2Report r = theorem2_check(model, S, cfg.n_states, cfg.seed, tol);
  const auto states = sample_states(model, cfg.n_states, cfg.seed);

  report["model"] = model.name;
  report["params"] = params_json(params);
  report["metric"] = matrix_json(S.matrix());
  report["invariance_defect"] = r.invariance_defect;
  report["symmetry_defect"] = r.symmetry_defect;
  report["trace_identity_defect"] = trace_identity_defect(model, S, states);
  report["verdict"] = r.verdict;
  report["agree"] = r.agree;
  report["seed"] = r.seed;
  report["n_states"] = r.n_states;
  report["tolerances"] = {{"invariant", tol.invariant}, {"not_invariant", tol.not_invariant}};
  return r.agree ? 0 : 2;
}

struct FieldInput {
  std::optional<ManufacturedField> catalog;
  std::optional<GridField> file;
};

inline FieldInput field_input(const RunConfig& cfg) {
  if (cfg.field.empty()) throw InputError("missing --field (PATH or catalog:NAME)");
  FieldInput in;
  if (cfg.field.rfind("catalog:", 0) == 0) {
    in.catalog = manufactured(cfg.field.substr(8));
  } else {
    if (!std::filesystem::exists(cfg.field)) throw InputError("field file " + cfg.field + " does not exist");
    in.file = load_field(cfg.field);
  }
  return in;
}

inline LagrangianModel field_model(const RunConfig& cfg, const FieldInput& in, json& report) {
  std::string name = cfg.model;
  std::string params = cfg.params;
  if (name.empty()) {
    if (!in.catalog) throw InputError("--model is required for field files");
    name = in.catalog->model;
    params = in.catalog->model_params;
  }
  const Params p = parse_params(params);
  report["model"] = name;
  report["params"] = params_json(p);
  return make_model(name, p);
}

inline double order(double coarse, double fine) {
  return (coarse > 0.0 && fine > 0.0) ? std::log2(coarse / fine) : std::numeric_limits<double>::quiet_NaN();
}

inline int cmd_verify(const RunConfig& cfg, json& report) {
  const FieldInput in = field_input(cfg);
  const LagrangianModel model = field_model(cfg, in, report);
  const auto tols = parse_tolerances(cfg.tol);
  const double tol_res = tol_or(tols, "residual", 1e-3);
  if (in.file && cfg.refine > 0) throw InputError("--refine needs a catalog field");

  json levels = json::array();
  std::vector<std::vector<double>> rows_by_level;
  std::vector<double> entropy_by_level;
  double last_closed = 0.0;
  for (int lev = 0; lev <= cfg.refine; ++lev) {
    const double h = cfg.h / std::pow(2.0, lev);
    const GridField F = in.catalog ? in.catalog->sample(h) : *in.file;
    json L;
    if (in.catalog) L["h"] = h;
    L["dims"] = F.geometry().dims;
    last_closed = closedness_residual(F);
    L["closedness_residual"] = last_closed;
    const auto rows = div_T_residual(model, F);
    L["div_T_residual"] = rows;
    rows_by_level.push_back(rows);
    if (F.has_entropy() && model.uses_entropy && F.degree() == F.dim() - 1) {
      const EntropyTransport et = entropy_transport_residual(model, F);
      L["entropy_transport"] = {{"residual", et.residual},
                                {"factor_min_abs", et.factor_min_abs},
                                {"factor_max_abs", et.factor_max_abs}};
      entropy_by_level.push_back(et.residual);
    }
    levels.push_back(L);
  }
  report["field"] = cfg.field;
  report["levels"] = levels;
  if (cfg.refine > 0) {
    json orders = json::array();
    for (std::size_t k = 1; k < rows_by_level.size(); ++k) {
      json o = json::array();
      for (std::size_t i = 0; i < rows_by_level[k].size(); ++i) o.push_back(order(rows_by_level[k - 1][i], rows_by_level[k][i]));
      orders.push_back(o);
    }
    report["div_T_orders"] = orders;
    if (entropy_by_level.size() > 1) {
      json eo = json::array();
      for (std::size_t k = 1; k < entropy_by_level.size(); ++k) eo.push_back(order(entropy_by_level[k - 1], entropy_by_level[k]));
      report["entropy_orders"] = eo;
    }
  }
  const auto& fin = rows_by_level.back();
  const double worst = *std::max_element(fin.begin(), fin.end());
  const bool pass = worst <= tol_res;
  report["tolerance"] = tol_res;
  report["passed"] = pass;
  return pass ? 0 : 2;
}

/// Bump vector field centred in the box with seeded random direction data.
inline AnalyticVectorField seeded_bump(const GridGeometry& g, std::uint64_t seed) {
  const int d = g.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Vector center(d), a(d);
  Matrix B(d, d);
  double extent = std::numeric_limits<double>::infinity();
  for (int k = 0; k < d; ++k) {
    const double len = g.spacing[k] * (g.dims[k] - 1);
    center[k] = g.origin[k] + 0.5 * len;
    extent = std::min(extent, len);
    a[k] = n01(rng);
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) B(i, j) = n01(rng);
  }
  return bump_vector_field(center, 0.3 * extent, a, B);
}

inline int cmd_variation(const RunConfig& cfg, json& report) {
  const FieldInput in = field_input(cfg);
  const LagrangianModel model = field_model(cfg, in, report);
  const auto tols = parse_tolerances(cfg.tol);
  const double tol_var = tol_or(tols, "variation", 1e-3);
  FirstVariationResult r;
  if (in.catalog) {
    const GridGeometry g = in.catalog->geometry(cfg.h);
    r = first_variation(model, g, in.catalog->form, seeded_bump(g, cfg.seed), cfg.eps);
    report["h"] = cfg.h;
  } else {
    const GridGeometry& g = in.file->geometry();
    const AnalyticVectorField xi = seeded_bump(g, cfg.seed);
    r = first_variation(model, *in.file, VariationField::sample(g, xi.value), cfg.eps);
  }
  const double diff = std::abs(r.numeric_derivative - r.tensor_pairing);
  report["field"] = cfg.field;
  report["eps"] = cfg.eps;
  report["seed"] = cfg.seed;
  report["numeric_derivative"] = r.numeric_derivative;
  report["tensor_pairing"] = r.tensor_pairing;
  report["divergence_pairing"] = r.divergence_pairing;
  report["difference"] = diff;
  report["tolerance"] = tol_var;
  report["passed"] = diff <= tol_var;
  return diff <= tol_var ? 0 : 2;
}

inline int cmd_jump(const RunConfig& cfg, json& report) {
  const json sj = read_json_arg(cfg.state);
  if (!sj.is_object() || !sj.contains("left") || !sj.contains("right") || !sj.contains("nu")) {
    throw InputError("jump state needs 'left', 'right' and 'nu'");
  }
  Params params = parse_params(cfg.params);
  infer_space_dim(cfg.model, params, sj.at("left"));
  const LagrangianModel model = make_model(cfg.model, params);
  std::vector<double> nu = vec(sj, "nu");
  const double len = norm2(nu);
  if (!(len > 0.0)) throw InputError("normal 'nu' must be nonzero");
  for (double& x : nu) x /= len;
  const JumpResiduals r = rankine_hugoniot(model, {nu, parse_state(model, sj.at("left")), parse_state(model, sj.at("right"))});
  const double tol = tol_or(parse_tolerances(cfg.tol), "jump", 1e-10);

  report["model"] = model.name;
  report["params"] = params_json(params);
  report["nu"] = nu;
  report["rows"] = r.rows;
  report["max_residual"] = r.max_residual;
  if (r.flux_jump) report["flux_jump"] = *r.flux_jump;
  if (r.nu_lambda_nu) report["nu_lambda_nu"] = *r.nu_lambda_nu;
  if (r.rho_jump) report["rho_jump"] = *r.rho_jump;
  report["tolerance"] = tol;
  report["passed"] = r.max_residual <= tol;
  return r.max_residual <= tol ? 0 : 2;
}

}  // namespace detail

/// Executes one parsed configuration; the report goes to `out`.
inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  json report = json::object();
  int status = 0;
  try {
    if (cfg.command != "models" && cfg.model.empty() && cfg.command != "verify" && cfg.command != "variation") {
      throw InputError("--model is required");
    }
    if (cfg.command == "models") status = detail::cmd_models(report);
    else if (cfg.command == "tensor") status = detail::cmd_tensor(cfg, report);
    else if (cfg.command == "invariance") status = detail::cmd_invariance(cfg, report);
    else if (cfg.command == "verify") status = detail::cmd_verify(cfg, report);
    else if (cfg.command == "variation") status = detail::cmd_variation(cfg, report);
    else if (cfg.command == "jump") status = detail::cmd_jump(cfg, report);
    else throw InputError("unknown command '" + cfg.command + "'");
    if (cfg.command != "models") report["command"] = cfg.command;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const OutputFormat fmt = cfg.output == "csv"      ? OutputFormat::Csv
                           : cfg.output == "pretty" ? OutputFormat::Pretty
                                                    : OutputFormat::Json;
  const std::string text = report_serialize(report, fmt);
  if (cfg.out.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.out << "\n";
      return 1;
    }
    f << text;
  }
  return status;
}

/// Parses argv-style arguments (without the program name) and executes.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"divfree: divergence-free tensors of variational problems on closed forms"};
  app.set_help_flag("--help", "print this help");  // -h would clash with --h
  RunConfig cfg;
  std::vector<std::string> metric;
  app.add_option("command", cfg.command, "tensor | invariance | verify | variation | jump | models")
      ->required()
      ->check(CLI::IsMember({"tensor", "invariance", "verify", "variation", "jump", "models"}));
  app.add_option("--model", cfg.model, "registered model name");
  app.add_option("--params", cfg.params, "model parameters k=v,...");
  app.add_option("--state", cfg.state, "state JSON, inline or a file path");
  app.add_option("--field", cfg.field, "field manifest PATH or catalog:NAME");
  app.add_option("--metric", metric, "euclidean | minkowski | custom PATH")->expected(1, 2);
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--tol", cfg.tol, "tolerances NAME=V,...");
  app.add_option("--h", cfg.h, "grid spacing for catalog fields")->check(CLI::PositiveNumber);
  app.add_option("--refine", cfg.refine, "number of h-halvings")->check(CLI::NonNegativeNumber);
  app.add_option("--eps", cfg.eps, "flow parameter step for variation")->check(CLI::PositiveNumber);
  app.add_option("--n-states", cfg.n_states, "random states for invariance")->check(CLI::NonNegativeNumber);
  app.add_option("--out", cfg.out, "write the report to PATH");
  app.add_option("--output", cfg.output, "json | csv | pretty")->check(CLI::IsMember({"json", "csv", "pretty"}));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }
  if (!metric.empty()) {
    cfg.metric = metric[0];
    if (metric.size() > 1) cfg.metric_path = metric[1];
  }
  return execute(cfg, out, err);
}

}  // namespace divfree::cli
