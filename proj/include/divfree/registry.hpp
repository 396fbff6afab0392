#pragma once

// Built-in models by name, with key=value parameters.

#include "divfree/expression.hpp"
#include "divfree/models.hpp"

#include <map>
#include <set>

namespace divfree {

class UnknownModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Params = std::map<std::string, std::string>;

/// Splits "k=v,k=v" on top-level commas (commas inside parentheses stay).
inline Params parse_params(const std::string& text) {
  Params out;
  std::string cur;
  int depth = 0;
  auto flush = [&] {
    if (cur.empty()) return;
    const auto eq = cur.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("parameter '" + cur + "' is not key=value");
    out[cur.substr(0, eq)] = cur.substr(eq + 1);
    cur.clear();
  };
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

struct ModelInfo {
  std::string name;
  std::string description;
  std::string defaults;  // default parameters
};

inline const std::vector<ModelInfo>& registered_models() {
  static const std::vector<ModelInfo> list = {
      {"iso-p1", "isotropic 1-form density e^s r^2/2 + beta r^4/4, r = |A|", "d=3,beta=0.25"},
      {"minimal-surface", "non-parametric minimal surfaces sqrt(1 + |A|^2)", "d=2"},
      {"gas", "classical gas |q|^2/(2 rho) - g(rho,s); g = polytropic e^s rho^gamma/gamma or isothermal",
       "n=1,g=polytropic,gamma=2,theta=1"},
      {"gas-polytropic", "classical gas with g = e^s rho^gamma/gamma", "n=1,gamma=1.4"},
      {"relativistic", "relativistic gas L = rho c^2 + e^s rho^kappa/(kappa-1)", "n=3,c=1,kappa=1.6666666666666667"},
      {"relativistic-powerlaw", "relativistic gas L = e^s rho^kappa", "n=3,c=1,kappa=1.3333333333333333"},
      {"relativistic-limit", "relativistic limit case L = rho^2", "n=3,c=1"},
      {"maxwell-linear", "electromagnetism (|E|^2 - |B|^2)/2", ""},
      {"maxwell-lorentz", "Lorentz-invariant F + a F^2 + b G^2, F = (|E|^2-|B|^2)/2, G = E.B", "a=0.2,b=0.3"},
      {"maxwell-anisotropic", "frame-dependent |E|^2", ""},
      {"user-expr", "expression over coefficients A<indices> and s", "d=2,p=1,expr=(required)"},
  };
  return list;
}

namespace detail {

class ParamReader {
 public:
  ParamReader(const std::string& model, const Params& p, std::set<std::string> allowed)
      : model_(model), p_(p) {
    for (const auto& [k, v] : p_) {
      if (!allowed.count(k)) throw std::invalid_argument("model " + model + ": unknown parameter '" + k + "'");
    }
  }
  double real(const std::string& k, double def) const {
    const auto it = p_.find(k);
    if (it == p_.end()) return def;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(k);
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("model " + model_ + ": parameter " + k + " is not a number");
    }
  }
  int integer(const std::string& k, int def) const {
    const double v = real(k, def);
    if (v != std::floor(v)) throw std::invalid_argument("model " + model_ + ": parameter " + k + " must be an integer");
    return static_cast<int>(v);
  }
  std::string text(const std::string& k, const std::string& def) const {
    const auto it = p_.find(k);
    return it == p_.end() ? def : it->second;
  }

 private:
  std::string model_;
  const Params& p_;
};

}  // namespace detail

inline LagrangianModel make_model(const std::string& name, const Params& params = {}) {
  using detail::ParamReader;
  if (name == "iso-p1") {
    ParamReader r(name, params, {"d", "beta"});
    return model_isotropic_p1(name, r.integer("d", 3), quartic_profile(r.real("beta", 0.25)), true);
  }
  if (name == "minimal-surface") {
    ParamReader r(name, params, {"d"});
    return model_isotropic_p1(name, r.integer("d", 2), minimal_surface_profile(), false);
  }
  if (name == "gas") {
    ParamReader r(name, params, {"n", "g", "gamma", "theta"});
    const std::string g = r.text("g", "polytropic");
    if (g == "polytropic") return model_gas_dynamics(name, polytropic_energy(r.real("gamma", 2.0)), r.integer("n", 1));
    if (g == "isothermal") return model_gas_dynamics(name, isothermal_energy(r.real("theta", 1.0)), r.integer("n", 1));
    throw std::invalid_argument("model gas: g must be polytropic or isothermal");
  }
  if (name == "gas-polytropic") {
    ParamReader r(name, params, {"n", "gamma"});
    return model_gas_dynamics(name, polytropic_energy(r.real("gamma", 1.4)), r.integer("n", 1));
  }
  if (name == "relativistic") {
    ParamReader r(name, params, {"n", "c", "kappa"});
    const double c = r.real("c", 1.0);
    return model_relativistic(name, rest_plus_internal_density(r.real("kappa", 5.0 / 3.0), c), c, r.integer("n", 3));
  }
  if (name == "relativistic-powerlaw") {
    ParamReader r(name, params, {"n", "c", "kappa"});
    const double kappa = r.real("kappa", 4.0 / 3.0);
    LagrangianModel m = model_relativistic(name, power_law_density(kappa), r.real("c", 1.0), r.integer("n", 3));
    std::get<RelativisticFamily>(m.family).kappa = kappa;
    return m;
  }
  if (name == "relativistic-limit") {
    ParamReader r(name, params, {"n", "c"});
    return model_relativistic(name, limit_density(), r.real("c", 1.0), r.integer("n", 3), true);
  }
  if (name == "maxwell-linear") {
    ParamReader r(name, params, {});
    return model_maxwell(name, maxwell_linear_density());
  }
  if (name == "maxwell-lorentz") {
    ParamReader r(name, params, {"a", "b"});
    return model_maxwell(name, maxwell_lorentz_density(r.real("a", 0.2), r.real("b", 0.3)));
  }
  if (name == "maxwell-anisotropic") {
    ParamReader r(name, params, {});
    return model_maxwell(name, maxwell_anisotropic_density());
  }
  if (name == "user-expr") {
    ParamReader r(name, params, {"d", "p", "expr"});
    const std::string expr = r.text("expr", "");
    if (expr.empty()) throw std::invalid_argument("model user-expr: parameter expr is required");
    return model_expression(expr, r.integer("d", 2), r.integer("p", 1));
  }
  throw UnknownModel("unknown model '" + name + "'");
}

}  // namespace divfree
