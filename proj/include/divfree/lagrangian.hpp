#pragma once

// Lagrangian densities L(A, s) over the coefficients of a p-form, with three
// gradient routes: hand-written closed forms, forward-mode AD, and central
// finite differences.

#include "divfree/dual.hpp"
#include "divfree/exterior_algebra.hpp"
#include "divfree/linalg.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace divfree {

/// Evaluation left the model's domain (non-positive density, luminal state, NaN).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |A| = 0 with a non-vanishing radial derivative: the gradient has no limit.
class SingularGradient : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// f(x, s) usable at double and Dual precision, with its closed-form partials.
struct ScalarProfile {
  std::function<double(double, double)> f;
  std::function<Dual(Dual, Dual)> f_dual;
  std::function<double(double, double)> df_dx;
  std::function<double(double, double)> df_ds;

  template <class F, class Dx, class Ds>
  static ScalarProfile make(F fn, Dx dx, Ds ds) {
    return {[fn](double x, double s) { return fn(x, s); },
            [fn](Dual x, Dual s) { return fn(x, s); }, std::move(dx), std::move(ds)};
  }
};

using Vec3 = std::array<double, 3>;

/// L(E, B, s) for the electromagnetic 2-form, with D = dL/dE and dL/dB.
struct EMDensity {
  std::function<double(const Vec3&, const Vec3&, double)> f;
  std::function<Dual(const std::array<Dual, 3>&, const std::array<Dual, 3>&, Dual)> f_dual;
  std::function<Vec3(const Vec3&, const Vec3&, double)> dL_dE;
  std::function<Vec3(const Vec3&, const Vec3&, double)> dL_dB;
  std::function<double(const Vec3&, const Vec3&, double)> dL_ds;

  template <class F, class DE, class DB, class Ds>
  static EMDensity make(F fn, DE de, DB db, Ds ds) {
    return {[fn](const Vec3& e, const Vec3& b, double s) { return fn(e, b, s); },
            [fn](const std::array<Dual, 3>& e, const std::array<Dual, 3>& b, Dual s) { return fn(e, b, s); },
            std::move(de), std::move(db), std::move(ds)};
  }
};

// Family tags carry the physics a specialized assembler needs.
struct IsotropicFamily {
  ScalarProfile ell;  // ell(r, s), r = |A|
};
struct GasFamily {
  ScalarProfile g;  // internal energy g(rho, s)
  int n = 1;
};
struct RelativisticFamily {
  ScalarProfile rest;  // L(rho, s)
  double c = 1.0;
  int n = 3;
  bool limit_case = false;
  std::optional<double> kappa;  // set for the power law f(s) rho^kappa
};
struct MaxwellFamily {
  EMDensity density;
};

using ModelFamily = std::variant<std::monostate, IsotropicFamily, GasFamily, RelativisticFamily, MaxwellFamily>;

using CoeffGradient = std::function<std::vector<double>(std::span<const double>, double)>;

class LagrangianModel {
 public:
  using Eval = std::function<double(std::span<const double>, double)>;
  using EvalDual = std::function<Dual(std::span<const Dual>, Dual)>;
  using Sampler = std::function<PFormValue(std::mt19937_64&)>;

  std::string name;
  int dim = 0;
  int degree = 0;
  bool uses_entropy = false;
  Eval eval;
  EvalDual eval_dual;
  CoeffGradient closed_gradient;                           // empty when only AD is available
  std::function<double(std::span<const double>, double)> closed_entropy_derivative;
  std::optional<Matrix> metric_hint;
  Sampler sampler;
  ModelFamily family;

  int size() const { return static_cast<int>(binomial(dim, degree)); }

  void check_shape(const PFormValue& a) const {
    if (a.dim != dim || a.degree != degree) {
      throw std::invalid_argument("model " + name + ": expected (d,p)=(" + std::to_string(dim) + "," +
                                  std::to_string(degree) + "), got (" + std::to_string(a.dim) + "," +
                                  std::to_string(a.degree) + ")");
    }
  }

  double evaluate(const PFormValue& a) const {
    check_shape(a);
    const double v = eval(a.coeffs, a.entropy_or_zero());
    if (!std::isfinite(v)) throw DomainError("model " + name + ": non-finite value");
    return v;
  }

  /// dL/dA_J in storage order; closed form when available, AD otherwise.
  std::vector<double> gradient(const PFormValue& a) const {
    check_shape(a);
    if (closed_gradient) return closed_gradient(a.coeffs, a.entropy_or_zero());
    return ad_gradient_at(a);
  }

  /// dL/dA_H through an arbitrary tuple H: parity times the canonical partial.
  double gradient_at(const PFormValue& a, std::span<const int> raw) const {
    const Canonical c = canonicalize(raw, dim);
    if (static_cast<int>(raw.size()) != degree) throw std::invalid_argument("gradient_at: wrong degree");
    if (c.parity == 0) return 0.0;
    return c.parity * gradient(a)[static_cast<std::size_t>(form_basis(dim, degree).position(c.index))];
  }

  std::vector<double> ad_gradient_at(const PFormValue& a) const {
    check_shape(a);
    std::vector<Dual> x(a.coeffs.begin(), a.coeffs.end());
    std::vector<double> g(x.size());
    const Dual s(a.entropy_or_zero());
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k].d = 1.0;
      const Dual r = eval_dual(x, s);
      x[k].d = 0.0;
      if (!std::isfinite(r.d) || !std::isfinite(r.v)) {
        throw DomainError("model " + name + ": AD produced a non-finite derivative");
      }
      g[k] = r.d;
    }
    return g;
  }

  std::vector<double> fd_gradient_at(const PFormValue& a) const {
    check_shape(a);
    std::vector<double> x = a.coeffs;
    std::vector<double> g(x.size());
    const double s = a.entropy_or_zero();
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double x0 = x[k];
      const double h = 1e-6 * (1.0 + std::abs(x0));
      x[k] = x0 + h;
      const double fp = eval(x, s);
      x[k] = x0 - h;
      const double fm = eval(x, s);
      x[k] = x0;
      g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
  }

  /// dL/ds; zero for entropy-free models.
  double entropy_derivative(const PFormValue& a) const {
    check_shape(a);
    if (!uses_entropy) return 0.0;
    if (closed_entropy_derivative) return closed_entropy_derivative(a.coeffs, a.entropy_or_zero());
    std::vector<Dual> x(a.coeffs.begin(), a.coeffs.end());
    const Dual r = eval_dual(x, Dual(a.entropy_or_zero(), 1.0));
    if (!std::isfinite(r.d)) throw DomainError("model " + name + ": non-finite entropy derivative");
    return r.d;
  }

  PFormValue sample(std::mt19937_64& rng) const {
    if (sampler) return sampler(rng);
    std::normal_distribution<double> n01;
    PFormValue a(dim, degree);
    for (double& c : a.coeffs) c = n01(rng);
    if (uses_entropy) a.entropy = 0.5 * n01(rng);
    return a;
  }

  /// True when the density and its AD gradient are finite at a.
  bool admissible(const PFormValue& a) const {
    try {
      evaluate(a);
      ad_gradient_at(a);
      return true;
    } catch (const std::domain_error&) {
      return false;
    }
  }
};

/// Builds a model from one generic callable fn(span<const T> A, T s) -> T that
/// is instantiated at double and Dual.
template <class F>
LagrangianModel make_lagrangian(std::string name, int d, int p, F fn, bool uses_entropy = false) {
  form_basis(d, p);
  LagrangianModel m;
  m.name = std::move(name);
  m.dim = d;
  m.degree = p;
  m.uses_entropy = uses_entropy;
  m.eval = [fn](std::span<const double> a, double s) { return fn(a, s); };
  m.eval_dual = [fn](std::span<const Dual> a, Dual s) { return fn(a, s); };
  return m;
}

/// Gradient function backed only by forward-mode AD of model.eval_dual.
inline CoeffGradient ad_gradient(const LagrangianModel& model) {
  return [model](std::span<const double> a, double s) {
    PFormValue v(model.dim, model.degree, std::vector<double>(a.begin(), a.end()), s);
    return model.ad_gradient_at(v);
  };
}

}  // namespace divfree
