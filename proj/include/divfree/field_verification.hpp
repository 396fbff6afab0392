#pragma once

// Discrete checks on sampled fields. All derivatives are second-order central
// differences at interior samples; boundary samples never enter a maximum.

#include "divfree/grid_field.hpp"
#include "divfree/interpolation.hpp"
#include "divfree/lagrangian.hpp"
#include "divfree/models.hpp"
#include "divfree/tensor_assembly.hpp"

#include <concepts>
#include <functional>
#include <optional>

namespace divfree {

namespace detail {

inline double central(const double* at, std::size_t stride, int comps, double h) {
  const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(stride) * comps;
  return (at[off] - at[-off]) / (2.0 * h);
}

}  // namespace detail

/// max over interior samples and (p+1)-tuples L of |sum_k (-1)^k d_{l_k} A_{L \ l_k}|.
inline double closedness_residual(const GridField& F) {
  const GridGeometry& g = F.geometry();
  g.require_min_samples(3, "closedness_residual");
  const int d = F.dim();
  const int p = F.degree();
  if (p == d) return 0.0;
  const FormBasis& B = form_basis(d, p);
  const auto upper = enumerate_subsets(d, p + 1);
  const int comps = F.components();
  double worst = 0.0;
  for (std::size_t c = 0; c < F.size(); ++c) {
    const auto idx = g.unravel(c);
    if (!g.interior(idx)) continue;
    const double* base = F.raw(c).data();
    for (const MultiIndex& L : upper) {
      double acc = 0.0;
      for (int k = 0; k <= p; ++k) {
        const int axis = L.entries[k];
        const int slot = B.position(L.mask() & ~(1u << axis));
        acc += (k % 2 ? -1.0 : 1.0) * detail::central(base + slot, g.stride(axis), comps, g.spacing[axis]);
      }
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

/// Row-wise divergence of a tensor field T(alpha(y)) at every sample;
/// boundary samples hold zeros. Layout: sample-major, d entries per sample.
template <class TensorFn>
  requires std::invocable<const TensorFn&, const PFormValue&>
std::vector<double> divergence_field(const GridField& F, const TensorFn& tensor) {
  const GridGeometry& g = F.geometry();
  g.require_min_samples(3, "divergence_field");
  const int d = F.dim();
  const std::size_t dd = static_cast<std::size_t>(d * d);
  std::vector<double> T(F.size() * dd);
  for (std::size_t c = 0; c < F.size(); ++c) {
    const Matrix t = tensor(F.at(c));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) T[c * dd + static_cast<std::size_t>(i * d + j)] = t(i, j);
    }
  }
  std::vector<double> div(F.size() * static_cast<std::size_t>(d), 0.0);
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (!g.interior(g.unravel(c))) continue;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        acc += detail::central(T.data() + c * dd + static_cast<std::size_t>(i * d + j), g.stride(j),
                               static_cast<int>(dd), g.spacing[j]);
      }
      div[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = acc;
    }
  }
  return div;
}

/// Max over interior samples of |(Div T)_i|, one entry per row i
/// (row 0 = energy, rows 1..n = momentum).
inline std::vector<double> div_T_residual(const LagrangianModel& model, const GridField& F) {
  if (F.dim() != model.dim || F.degree() != model.degree) throw std::invalid_argument("div_T_residual: model/field shape mismatch");
  const auto div = divergence_field(F, [&](const PFormValue& a) { return assemble_general(model, a).T; });
  const int d = F.dim();
  std::vector<double> rows(static_cast<std::size_t>(d), 0.0);
  for (std::size_t k = 0; k < div.size(); ++k) rows[k % d] = std::max(rows[k % d], std::abs(div[k]));
  return rows;
}

// ---------------------------------------------------------------------------
// First variation along flows of compactly supported vector fields

/// Vector field given in closed form: value xi(y) and Jacobian J_ij = d_j xi_i.
struct AnalyticVectorField {
  std::function<Vector(std::span<const double>)> value;
  std::function<Matrix(std::span<const double>)> jacobian;
};

template <class V>
concept VectorSource = requires(const V& v, std::span<const double> y) {
  { v.value(y) } -> std::convertible_to<Vector>;
  { v.jacobian(y) } -> std::convertible_to<Matrix>;
};

template <class F>
concept FormSource = requires(const F& f, std::span<const double> y) {
  { f(y) } -> std::convertible_to<PFormValue>;
};

struct FlowPoint {
  Vector y;
  Matrix M;  // d phi / dy
};

/// phi_eps(y0) and its Jacobian: classical RK4 on y' = xi(y), M' = J(y) M.
template <VectorSource V>
FlowPoint integrate_flow(const V& xi, std::span<const double> y0, double eps, int substeps) {
  const int d = static_cast<int>(y0.size());
  FlowPoint s{Eigen::Map<const Vector>(y0.data(), d), Matrix::Identity(d, d)};
  const double dt = eps / substeps;
  auto rhs = [&](const Vector& y, const Matrix& M) {
    std::span<const double> ys(y.data(), static_cast<std::size_t>(d));
    return std::pair<Vector, Matrix>{xi.value(ys), xi.jacobian(ys) * M};
  };
  for (int k = 0; k < substeps; ++k) {
    const auto [k1y, k1m] = rhs(s.y, s.M);
    const auto [k2y, k2m] = rhs(s.y + 0.5 * dt * k1y, s.M + 0.5 * dt * k1m);
    const auto [k3y, k3m] = rhs(s.y + 0.5 * dt * k2y, s.M + 0.5 * dt * k2m);
    const auto [k4y, k4m] = rhs(s.y + dt * k3y, s.M + dt * k3m);
    s.y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    s.M += dt / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
  }
  return s;
}

struct FirstVariationResult {
  double numeric_derivative = 0.0;  // (F[phi_eps^* a] - F[phi_-eps^* a]) / 2 eps
  double tensor_pairing = 0.0;      // -sum T_ij d_j xi_i vol
  double divergence_pairing = 0.0;  // +sum xi_i (Div T)_i vol
};

struct FlowOptions {
  int substeps = 8;
};

/// Discrete first-variation identity on the grid geometry g. The form is
/// transported as (phi^* alpha)(y) = Dphi(y)^* alpha(phi(y)), the entropy as
/// s(phi(y)). The pairing uses the exact Jacobian of xi, so at fixed h the two
/// sides differ by O(eps^2) plus the quadrature error of a divergence.
template <FormSource Form, VectorSource Xi>
FirstVariationResult first_variation(const LagrangianModel& model, const GridGeometry& g, const Form& form,
                                     const Xi& xi, double eps, FlowOptions opt = {}) {
  if (g.dim() != model.dim) throw std::invalid_argument("first_variation: grid dimension != model dimension");
  if (opt.substeps < 8) throw std::invalid_argument("first_variation: need >= 8 flow substeps");
  g.require_min_samples(2 * VariationField::kMargin + 1, "first_variation");
  const int d = g.dim();
  const double vol = g.cell_volume();
  const VariationField xs = VariationField::sample(g, [&](std::span<const double> y) { return xi.value(y); });

  auto node_form = [&](std::size_t c) {
    if constexpr (requires { form.at_node(c); }) {
      return form.at_node(c);
    } else {
      const auto y = g.position(c);
      return form(std::span<const double>(y));
    }
  };
  auto transported = [&](std::span<const double> y, double e) {
    const FlowPoint fp = integrate_flow(xi, y, e, opt.substeps);
    for (int a = 0; a < d; ++a) {
      const double lo = g.origin[a];
      const double hi = g.origin[a] + g.spacing[a] * (g.dims[a] - 1);
      if (fp.y[a] < lo || fp.y[a] > hi) throw std::out_of_range("first_variation: flow exits grid");
    }
    PFormValue a = form(std::span<const double>(fp.y.data(), static_cast<std::size_t>(d)));
    return pullback(fp.M, a);
  };

  FirstVariationResult r;
  for (std::size_t c = 0; c < g.count(); ++c) {
    const auto y = g.position(c);
    const std::span<const double> ys(y);
    const Vector v = xi.value(ys);
    if (v.isZero(0.0) && xi.jacobian(ys).isZero(0.0)) continue;
    const double lp = model.evaluate(transported(ys, eps));
    const double lm = model.evaluate(transported(ys, -eps));
    r.numeric_derivative += (lp - lm) / (2.0 * eps) * vol;
  }

  std::vector<int> slot(g.count(), -1);
  std::vector<Matrix> cache;
  auto tensor_at = [&](std::size_t c) -> const Matrix& {
    if (slot[c] < 0) {
      slot[c] = static_cast<int>(cache.size());
      cache.push_back(assemble_general(model, node_form(c)).T);
    }
    return cache[static_cast<std::size_t>(slot[c])];
  };

  for (std::size_t c = 0; c < g.count(); ++c) {
    const auto idx = g.unravel(c);
    if (!g.interior(idx)) continue;
    const auto y = g.position(c);
    const Matrix Dxi = xi.jacobian(std::span<const double>(y));
    if (!Dxi.isZero(0.0)) r.tensor_pairing -= (tensor_at(c).array() * Dxi.array()).sum() * vol;

    const auto xc = xs.at(c);
    bool nonzero = false;
    for (double x : xc) nonzero = nonzero || x != 0.0;
    if (!nonzero) continue;
    for (int i = 0; i < d; ++i) {
      double div = 0.0;
      for (int j = 0; j < d; ++j) {
        const std::size_t s = g.stride(j);
        div += (tensor_at(c + s)(i, j) - tensor_at(c - s)(i, j)) / (2.0 * g.spacing[j]);
      }
      r.divergence_pairing += xc[i] * div * vol;
    }
  }
  return r;
}

/// Grid-only variant: the field and the vector field are interpolated between samples.
inline FirstVariationResult first_variation(const LagrangianModel& model, const GridField& F, const VariationField& xi,
                                            double eps, FlowOptions opt = {}) {
  if (!(F.geometry() == xi.geometry())) throw std::invalid_argument("first_variation: field and xi grids differ");
  struct NodeAware {
    FieldInterpolant interp;
    const GridField* field;
    PFormValue operator()(std::span<const double> y) const { return interp(y); }
    PFormValue at_node(std::size_t c) const { return field->at(c); }
  };
  return first_variation(model, F.geometry(), NodeAware{FieldInterpolant(F), &F}, VariationInterpolant(xi), eps, opt);
}

/// Compactly supported xi(y) = phi(|y - center|/radius) (a + B (y - center)),
/// phi(r) = (1 - r^2)^4 for r < 1. A C^3 profile keeps the second-order
/// difference errors in their asymptotic regime on coarse grids; the C-infinity
/// exp(1 - 1/(1 - r^2)) bump is too steep near its edge for that.
inline AnalyticVectorField bump_vector_field(Vector center, double radius, Vector a, Matrix B) {
  auto eval = [=](std::span<const double> y, Vector* value, Matrix* jac) {
    const int d = static_cast<int>(center.size());
    const Vector z = Eigen::Map<const Vector>(y.data(), d) - center;
    const double r2 = z.squaredNorm() / (radius * radius);
    if (value) *value = Vector::Zero(d);
    if (jac) *jac = Matrix::Zero(d, d);
    if (r2 >= 1.0) return;
    const double u = 1.0 - r2;
    const double phi = u * u * u * u;
    const Vector dphi = (-8.0 * u * u * u / (radius * radius)) * z;
    const Vector w = a + B * z;
    if (value) *value = phi * w;
    if (jac) *jac = w * dphi.transpose() + phi * B;
  };
  return {[eval](std::span<const double> y) {
            Vector v;
            eval(y, &v, nullptr);
            return v;
          },
          [eval](std::span<const double> y) {
            Matrix J;
            eval(y, nullptr, &J);
            return J;
          }};
}

// ---------------------------------------------------------------------------
// Entropy transport, irrotational flows, jump relations

/// d/ds (L - m . dL/dm) at a state, by central differences in s.
inline double entropy_factor(const LagrangianModel& model, const PFormValue& a) {
  auto scalar_part = [&](double s) {
    PFormValue b = a;
    b.entropy = s;
    const std::vector<double> g = model.gradient(b);
    double acc = model.evaluate(b);
    for (std::size_t k = 0; k < g.size(); ++k) acc -= b.coeffs[k] * g[k];
    return acc;
  };
  const double s = a.entropy_or_zero();
  const double h = 1e-5 * (1.0 + std::abs(s));
  return (scalar_part(s + h) - scalar_part(s - h)) / (2.0 * h);
}

struct EntropyTransport {
  double residual = 0.0;  // max |m . grad s|
  double factor_min_abs = 0.0;
  double factor_max_abs = 0.0;
};

inline EntropyTransport entropy_transport_residual(const LagrangianModel& model, const GridField& F) {
  if (!F.has_entropy()) throw std::invalid_argument("entropy_transport_residual: field carries no entropy");
  if (F.degree() != F.dim() - 1) throw std::invalid_argument("entropy_transport_residual: need a (d-1)-form field");
  const GridGeometry& g = F.geometry();
  g.require_min_samples(3, "entropy_transport_residual");
  const int d = F.dim();
  const int comps = F.components();
  EntropyTransport r;
  r.factor_min_abs = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (!g.interior(g.unravel(c))) continue;
    const PFormValue a = F.at(c);
    const auto m = decode_nform(a);
    const double* s_at = F.raw(c).data() + (comps - 1);
    double acc = 0.0;
    for (int j = 0; j < d; ++j) acc += m[j] * detail::central(s_at, g.stride(j), comps, g.spacing[j]);
    r.residual = std::max(r.residual, std::abs(acc));
    const double f = std::abs(entropy_factor(model, a));
    r.factor_min_abs = std::min(r.factor_min_abs, f);
    r.factor_max_abs = std::max(r.factor_max_abs, f);
  }
  if (!std::isfinite(r.factor_min_abs)) r.factor_min_abs = 0.0;
  return r;
}

struct BernoulliResiduals {
  double curl = 0.0;       // max |d_a v_b - d_b v_a|, v = grad_x psi
  double bernoulli = 0.0;  // max |d_t psi + |grad_x psi|^2/2 + dg/drho|
};

/// Axis 0 is time. Checks the potential-flow relations of first-principle flows.
inline BernoulliResiduals bernoulli_check(const ScalarProfile& g, const ScalarGrid& psi, const ScalarGrid& rho,
                                          double s = 0.0) {
  if (!(psi.geom == rho.geom)) throw std::invalid_argument("bernoulli_check: psi and rho grids differ");
  const GridGeometry& G = psi.geom;
  G.require_min_samples(5, "bernoulli_check");
  const int d = G.dim();
  const int n = d - 1;
  // v_a = d_{a} psi for spatial axes a = 1..n, stored at every interior sample
  std::vector<double> v(G.count() * static_cast<std::size_t>(d), 0.0);
  BernoulliResiduals r;
  for (std::size_t c = 0; c < G.count(); ++c) {
    if (!G.interior(G.unravel(c))) continue;
    double grad2 = 0.0;
    for (int a = 1; a <= n; ++a) {
      const double va = detail::central(psi.values.data() + c, G.stride(a), 1, G.spacing[a]);
      v[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] = va;
      grad2 += va * va;
    }
    const double dt = detail::central(psi.values.data() + c, G.stride(0), 1, G.spacing[0]);
    r.bernoulli = std::max(r.bernoulli, std::abs(dt + 0.5 * grad2 + g.df_dx(rho.values[c], s)));
  }
  if (n >= 2) {
    for (std::size_t c = 0; c < G.count(); ++c) {
      if (!G.interior(G.unravel(c), 2)) continue;
      for (int a = 1; a <= n; ++a) {
        for (int b = a + 1; b <= n; ++b) {
          const double dvb = detail::central(v.data() + c * d + b, G.stride(a), d, G.spacing[a]);
          const double dva = detail::central(v.data() + c * d + a, G.stride(b), d, G.spacing[b]);
          r.curl = std::max(r.curl, std::abs(dvb - dva));
        }
      }
    }
  }
  return r;
}

struct JumpInterface {
  std::vector<double> nu;  // unit space-time normal
  PFormValue left;
  PFormValue right;
};

struct JumpResiduals {
  std::vector<double> rows;  // |([T] nu)_i|
  double max_residual = 0.0;
  std::optional<double> flux_jump;     // [m . nu] for (d-1)-forms
  std::optional<double> nu_lambda_nu;  // nu^T Lambda^{-1} nu for relativistic models
  std::optional<double> rho_jump;      // [rho] for gas models
};

inline JumpResiduals rankine_hugoniot(const LagrangianModel& model, const JumpInterface& J) {
  const int d = model.dim;
  if (static_cast<int>(J.nu.size()) != d) throw std::invalid_argument("rankine_hugoniot: normal has the wrong length");
  if (std::abs(norm2(J.nu) - 1.0) > 1e-12) throw std::invalid_argument("rankine_hugoniot: normal must be a unit vector");
  const Vector nu = to_eigen(J.nu);
  const Matrix TL = assemble_general(model, J.left).T;
  const Matrix TR = assemble_general(model, J.right).T;
  const Vector jump = (TR - TL) * nu;
  JumpResiduals r;
  for (int i = 0; i < d; ++i) {
    r.rows.push_back(std::abs(jump[i]));
    r.max_residual = std::max(r.max_residual, std::abs(jump[i]));
  }
  if (model.degree == d - 1) {
    const auto mL = decode_nform(J.left);
    const auto mR = decode_nform(J.right);
    double fj = 0.0;
    for (int i = 0; i < d; ++i) fj += (mR[i] - mL[i]) * J.nu[i];
    r.flux_jump = fj;
  }
  if (const auto* rel = std::get_if<RelativisticFamily>(&model.family)) {
    double q = -J.nu[0] * J.nu[0] / (rel->c * rel->c);
    for (int i = 1; i < d; ++i) q += J.nu[i] * J.nu[i];
    r.nu_lambda_nu = q;
    const RelativisticState sl{decode_nform(J.left), rel->c, 0.0};
    const RelativisticState sr{decode_nform(J.right), rel->c, 0.0};
    r.rho_jump = sr.rho() - sl.rho();
  } else if (std::holds_alternative<GasFamily>(model.family)) {
    r.rho_jump = decode_nform(J.right)[0] - decode_nform(J.left)[0];
  }
  return r;
}

}  // namespace divfree
