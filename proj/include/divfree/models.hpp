#pragma once

// Built-in Lagrangian families: isotropic 1-forms, classical and relativistic
// gas dynamics on (d-1)-forms, and electromagnetism on 2-forms over R^4.
// Every sign convention of the coefficient identifications lives in the
// encode/decode helpers below.

#include "divfree/lagrangian.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace divfree {

// ---------------------------------------------------------------------------
// (d-1)-forms <-> mass flux m = (m_0, ..., m_n), A_{i^} = (-1)^i m_i where i^
// is the increasing tuple omitting i.

/// Storage slot of i^ in Lambda^{d-1}(R^d).
inline int hat_slot(int d, int i) { return d - 1 - i; }

template <class T>
std::vector<T> decode_flux(std::span<const T> coeffs) {
  const int d = static_cast<int>(coeffs.size());
  std::vector<T> m(coeffs.size());
  for (int i = 0; i < d; ++i) {
    const T& a = coeffs[static_cast<std::size_t>(hat_slot(d, i))];
    m[static_cast<std::size_t>(i)] = (i % 2) ? T(-a) : a;
  }
  return m;
}

inline PFormValue encode_nform(std::span<const double> m, std::optional<double> s = std::nullopt) {
  const int d = static_cast<int>(m.size());
  PFormValue a(d, d - 1);
  for (int i = 0; i < d; ++i) a.coeffs[hat_slot(d, i)] = (i % 2) ? -m[i] : m[i];
  a.entropy = s;
  return a;
}

inline std::vector<double> decode_nform(const PFormValue& a) {
  if (a.degree != a.dim - 1) throw std::invalid_argument("decode_nform: need p = d-1");
  return decode_flux<double>(a.coeffs);
}

/// Chain rule back to coefficients: dL/dA_{i^} = (-1)^i dL/dm_i.
inline std::vector<double> flux_gradient_to_coeffs(const std::vector<double>& dL_dm) {
  const int d = static_cast<int>(dL_dm.size());
  std::vector<double> g(dL_dm.size());
  for (int i = 0; i < d; ++i) g[hat_slot(d, i)] = (i % 2) ? -dL_dm[i] : dL_dm[i];
  return g;
}

struct GasState {
  double rho = 1.0;
  std::vector<double> q;
  double s = 0.0;

  std::vector<double> flux() const {
    std::vector<double> m{rho};
    m.insert(m.end(), q.begin(), q.end());
    return m;
  }
};

inline PFormValue encode_gas(const GasState& st) {
  if (!(st.rho > 0.0)) throw DomainError("gas state: rho must be positive");
  const auto m = st.flux();
  return encode_nform(m, st.s);
}

inline GasState decode_gas(const PFormValue& a) {
  const auto m = decode_nform(a);
  return {m[0], std::vector<double>(m.begin() + 1, m.end()), a.entropy_or_zero()};
}

struct RelativisticState {
  std::vector<double> m;  // 4-momentum (or 1+n)
  double c = 1.0;
  double s = 0.0;

  /// rho = sqrt(-m^T Lambda m), Lambda = diag(-c^2, 1, ..., 1).
  double rho() const {
    double r2 = c * c * m[0] * m[0];
    for (std::size_t k = 1; k < m.size(); ++k) r2 -= m[k] * m[k];
    if (!(r2 > 0.0)) throw DomainError("relativistic state is luminal or superluminal");
    return std::sqrt(r2);
  }
  std::vector<double> velocity() const {
    const double r = rho();
    std::vector<double> u(m);
    for (double& x : u) x /= r;
    return u;
  }
};

/// Space-time electromagnetic field. Under the 2-form identification
/// A_{j0} = E_j and A_{ij} = eps(ijk) B_k.
struct EMState {
  Vec3 E{};
  Vec3 B{};
  double s = 0.0;
};

template <class T>
void decode_em(std::span<const T> a, std::array<T, 3>& E, std::array<T, 3>& B) {
  // Storage order for (d,p) = (4,2): 01 02 03 12 13 23.
  E = {T(-a[0]), T(-a[1]), T(-a[2])};
  B = {a[5], T(-a[4]), a[3]};
}

inline PFormValue encode_em(const EMState& st) {
  PFormValue a(4, 2);
  for (int j = 1; j <= 3; ++j) a.set({j, 0}, st.E[j - 1]);
  const int cyc[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
  for (const auto& c : cyc) a.set({c[0], c[1]}, st.B[c[2] - 1]);
  a.entropy = st.s;
  return a;
}

inline EMState decode_em(const PFormValue& a) {
  if (a.dim != 4 || a.degree != 2) throw std::invalid_argument("decode_em: need (d,p) = (4,2)");
  EMState st;
  decode_em<double>(a.coeffs, st.E, st.B);
  st.s = a.entropy_or_zero();
  return st;
}

/// dL/dA from (dL/dE, dL/dB).
inline std::vector<double> em_gradient_to_coeffs(const Vec3& dE, const Vec3& dB) {
  return {-dE[0], -dE[1], -dE[2], dB[2], -dB[1], dB[0]};
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// ---------------------------------------------------------------------------
// Isotropic densities L = ell(|A|, s) on 1-forms.

inline LagrangianModel model_isotropic_p1(std::string name, int d, ScalarProfile ell, bool uses_entropy) {
  LagrangianModel m;
  m.name = std::move(name);
  m.dim = d;
  m.degree = 1;
  m.uses_entropy = uses_entropy;
  m.eval = [f = ell.f](std::span<const double> a, double s) {
    double r2 = 0.0;
    for (double x : a) r2 += x * x;
    return f(std::sqrt(r2), s);
  };
  m.eval_dual = [f = ell.f_dual](std::span<const Dual> a, Dual s) {
    Dual r2 = 0.0;
    for (const Dual& x : a) r2 += x * x;
    return f(sqrt(r2), s);
  };
  m.closed_gradient = [ell, nm = m.name](std::span<const double> a, double s) {
    double r2 = 0.0;
    for (double x : a) r2 += x * x;
    const double r = std::sqrt(r2);
    std::vector<double> g(a.size(), 0.0);
    const double dr = ell.df_dx(r, s);
    if (r == 0.0) {
      if (dr != 0.0) throw SingularGradient("model " + nm + ": d ell/dr(0) != 0 at A = 0");
      return g;
    }
    for (std::size_t k = 0; k < a.size(); ++k) g[k] = dr * a[k] / r;
    return g;
  };
  m.closed_entropy_derivative = [ell](std::span<const double> a, double s) {
    double r2 = 0.0;
    for (double x : a) r2 += x * x;
    return ell.df_ds(std::sqrt(r2), s);
  };
  m.metric_hint = Matrix::Identity(d, d);
  m.sampler = [d, uses_entropy](std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    PFormValue a(d, 1);
    for (double& c : a.coeffs) c = n01(rng);
    if (uses_entropy) a.entropy = 0.5 * n01(rng);
    return a;
  };
  m.family = IsotropicFamily{std::move(ell)};
  return m;
}

/// ell(r, s) = e^s r^2/2 + beta r^4/4.
inline ScalarProfile quartic_profile(double beta) {
  return ScalarProfile::make(
      [beta](auto r, auto s) {
        using std::exp;
        return exp(s) * r * r / 2.0 + beta * r * r * r * r / 4.0;
      },
      [beta](double r, double s) { return std::exp(s) * r + beta * r * r * r; },
      [](double r, double s) { return std::exp(s) * r * r / 2.0; });
}

/// Non-parametric minimal surfaces, ell(r) = sqrt(1 + r^2).
inline ScalarProfile minimal_surface_profile() {
  return ScalarProfile::make(
      [](auto r, auto) {
        using std::sqrt;
        return sqrt(1.0 + r * r);
      },
      [](double r, double) { return r / std::sqrt(1.0 + r * r); }, [](double, double) { return 0.0; });
}

// ---------------------------------------------------------------------------
// Classical gas dynamics, L(rho, q, s) = |q|^2/(2 rho) - g(rho, s).

/// g = e^s rho^gamma / gamma.
inline ScalarProfile polytropic_energy(double gamma) {
  return ScalarProfile::make(
      [gamma](auto rho, auto s) {
        using std::exp;
        using std::pow;
        return exp(s) * pow(rho, gamma) / gamma;
      },
      [gamma](double rho, double s) { return std::exp(s) * std::pow(rho, gamma - 1.0); },
      [gamma](double rho, double s) { return std::exp(s) * std::pow(rho, gamma) / gamma; });
}

/// g = theta rho log(rho) + rho s; its pressure theta*rho does not depend on s.
inline ScalarProfile isothermal_energy(double theta) {
  return ScalarProfile::make(
      [theta](auto rho, auto s) {
        using std::log;
        return theta * rho * log(rho) + rho * s;
      },
      [theta](double rho, double s) { return theta * (std::log(rho) + 1.0) + s; },
      [](double rho, double) { return rho; });
}

/// Pressure p = rho dg/drho - g.
inline double gas_pressure(const ScalarProfile& g, double rho, double s) {
  return rho * g.df_dx(rho, s) - g.f(rho, s);
}

inline LagrangianModel model_gas_dynamics(std::string name, ScalarProfile g, int n) {
  if (n < 1) throw std::invalid_argument("model_gas_dynamics: n >= 1");
  const int d = n + 1;
  auto density = [g](auto a, auto s) {
    using T = std::remove_cvref_t<decltype(s)>;
    const auto m = decode_flux<T>(a);
    const T& rho = m[0];
    if (!(value_of(rho) > 0.0)) throw DomainError("gas: rho <= 0");
    T q2 = 0.0;
    for (std::size_t k = 1; k < m.size(); ++k) q2 += m[k] * m[k];
    if constexpr (std::is_same_v<T, Dual>) {
      return q2 / (2.0 * rho) - g.f_dual(rho, s);
    } else {
      return q2 / (2.0 * rho) - g.f(rho, s);
    }
  };
  LagrangianModel m = make_lagrangian(std::move(name), d, d - 1, density, true);
  m.closed_gradient = [g](std::span<const double> a, double s) {
    const auto mm = decode_flux<double>(a);
    const double rho = mm[0];
    if (!(rho > 0.0)) throw DomainError("gas: rho <= 0");
    double q2 = 0.0;
    for (std::size_t k = 1; k < mm.size(); ++k) q2 += mm[k] * mm[k];
    std::vector<double> dm(mm.size());
    dm[0] = -q2 / (2.0 * rho * rho) - g.df_dx(rho, s);
    for (std::size_t k = 1; k < mm.size(); ++k) dm[k] = mm[k] / rho;
    return flux_gradient_to_coeffs(dm);
  };
  m.closed_entropy_derivative = [g](std::span<const double> a, double s) {
    return -g.df_ds(value_of(a[static_cast<std::size_t>(hat_slot(static_cast<int>(a.size()), 0))]), s);
  };
  m.sampler = [n](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> urho(0.5, 2.0);
    std::uniform_real_distribution<double> us(-0.5, 0.5);
    std::normal_distribution<double> n01;
    GasState st;
    st.rho = urho(rng);
    st.q.resize(static_cast<std::size_t>(n));
    for (double& x : st.q) x = n01(rng);
    st.s = us(rng);
    return encode_gas(st);
  };
  m.family = GasFamily{std::move(g), n};
  return m;
}

// ---------------------------------------------------------------------------
// Relativistic gas dynamics, L = L(rho, s) with rho = sqrt(-m^T Lambda m).

/// kappa = 4/3 gives p = e c^2 / 3 and a trace-free tensor (radiation).
inline bool ultrarelativistic(double kappa) { return std::abs(kappa - 4.0 / 3.0) <= 1e-12; }

/// L = f(s) rho^kappa with f = e^s.
inline ScalarProfile power_law_density(double kappa) {
  return ScalarProfile::make(
      [kappa](auto rho, auto s) {
        using std::exp;
        using std::pow;
        return exp(s) * pow(rho, kappa);
      },
      [kappa](double rho, double s) { return kappa * std::exp(s) * std::pow(rho, kappa - 1.0); },
      [kappa](double rho, double s) { return std::exp(s) * std::pow(rho, kappa); });
}

/// Rest mass plus internal energy: L = rho c^2 + e^s rho^kappa / (kappa - 1).
inline ScalarProfile rest_plus_internal_density(double kappa, double c) {
  const double c2 = c * c;
  return ScalarProfile::make(
      [kappa, c2](auto rho, auto s) {
        using std::exp;
        using std::pow;
        return rho * c2 + exp(s) * pow(rho, kappa) / (kappa - 1.0);
      },
      [kappa, c2](double rho, double s) {
        return c2 + kappa * std::exp(s) * std::pow(rho, kappa - 1.0) / (kappa - 1.0);
      },
      [kappa](double rho, double s) { return std::exp(s) * std::pow(rho, kappa) / (kappa - 1.0); });
}

/// The limit case L = rho^2.
inline ScalarProfile limit_density() {
  return ScalarProfile::make([](auto rho, auto) { return rho * rho; },
                             [](double rho, double) { return 2.0 * rho; }, [](double, double) { return 0.0; });
}

/// Energy density e = L/c^2 and pressure p = rho dL/drho - L.
struct RelativisticThermo {
  double rho;
  double e;
  double p;
};

inline RelativisticThermo relativistic_thermo(const ScalarProfile& rest, double c, double rho, double s) {
  const double L = rest.f(rho, s);
  return {rho, L / (c * c), rho * rest.df_dx(rho, s) - L};
}

inline LagrangianModel model_relativistic(std::string name, ScalarProfile rest, double c, int n = 3,
                                          bool limit_case = false) {
  if (!(c > 0.0)) throw std::invalid_argument("model_relativistic: c > 0");
  const int d = n + 1;
  const double c2 = c * c;
  auto density = [rest, c2](auto a, auto s) {
    using T = std::remove_cvref_t<decltype(s)>;
    const auto m = decode_flux<T>(a);
    T r2 = c2 * m[0] * m[0];
    for (std::size_t k = 1; k < m.size(); ++k) r2 -= m[k] * m[k];
    if (!(value_of(r2) > 0.0) || !(value_of(m[0]) > 0.0)) {
      throw DomainError("relativistic: state violates m0 > |m|/c");
    }
    using std::sqrt;
    if constexpr (std::is_same_v<T, Dual>) {
      return rest.f_dual(sqrt(r2), s);
    } else {
      return rest.f(sqrt(r2), s);
    }
  };
  LagrangianModel m = make_lagrangian(std::move(name), d, d - 1, density, !limit_case);
  m.closed_gradient = [rest, c2](std::span<const double> a, double s) {
    const auto mm = decode_flux<double>(a);
    double r2 = c2 * mm[0] * mm[0];
    for (std::size_t k = 1; k < mm.size(); ++k) r2 -= mm[k] * mm[k];
    if (!(r2 > 0.0) || !(mm[0] > 0.0)) throw DomainError("relativistic: state violates m0 > |m|/c");
    const double rho = std::sqrt(r2);
    const double dL = rest.df_dx(rho, s);
    // d rho / dm = -Lambda m / rho
    std::vector<double> dm(mm.size());
    dm[0] = dL * c2 * mm[0] / rho;
    for (std::size_t k = 1; k < mm.size(); ++k) dm[k] = -dL * mm[k] / rho;
    return flux_gradient_to_coeffs(dm);
  };
  m.closed_entropy_derivative = [rest, c2](std::span<const double> a, double s) {
    const auto mm = decode_flux<double>(a);
    double r2 = c2 * mm[0] * mm[0];
    for (std::size_t k = 1; k < mm.size(); ++k) r2 -= mm[k] * mm[k];
    return rest.df_ds(std::sqrt(r2), s);
  };
  m.metric_hint = minkowski(d, c);
  m.sampler = [n, c, limit_case](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> urho(0.5, 2.0);
    std::uniform_real_distribution<double> us(-0.5, 0.5);
    std::normal_distribution<double> n01;
    const double rho = urho(rng);
    std::vector<double> u(static_cast<std::size_t>(n + 1));
    double w2 = 0.0;
    for (int k = 1; k <= n; ++k) {
      u[k] = 0.6 * n01(rng);
      w2 += u[k] * u[k];
    }
    u[0] = std::sqrt(1.0 + w2) / c;
    for (double& x : u) x *= rho;
    return encode_nform(u, limit_case ? std::optional<double>{} : std::optional<double>{us(rng)});
  };
  m.family = RelativisticFamily{std::move(rest), c, n, limit_case, std::nullopt};
  return m;
}

// ---------------------------------------------------------------------------
// Electromagnetism, L(E, B, s) on closed 2-forms over R^{1+3}.

/// 1/2 (|E|^2 - |B|^2).
inline EMDensity maxwell_linear_density() {
  return EMDensity::make(
      [](const auto& E, const auto& B, auto) {
        return 0.5 * (E[0] * E[0] + E[1] * E[1] + E[2] * E[2] - B[0] * B[0] - B[1] * B[1] - B[2] * B[2]);
      },
      [](const Vec3& E, const Vec3&, double) { return E; },
      [](const Vec3&, const Vec3& B, double) { return Vec3{-B[0], -B[1], -B[2]}; },
      [](const Vec3&, const Vec3&, double) { return 0.0; });
}

/// Euler-Heisenberg type density F + a F^2 + b G^2 with the two Lorentz
/// invariants F = (|E|^2 - |B|^2)/2 and G = E.B.
inline EMDensity maxwell_lorentz_density(double a, double b) {
  return EMDensity::make(
      [a, b](const auto& E, const auto& B, auto) {
        const auto F = 0.5 * (E[0] * E[0] + E[1] * E[1] + E[2] * E[2] - B[0] * B[0] - B[1] * B[1] - B[2] * B[2]);
        const auto G = E[0] * B[0] + E[1] * B[1] + E[2] * B[2];
        return F + a * F * F + b * G * G;
      },
      [a, b](const Vec3& E, const Vec3& B, double) {
        const double F = 0.5 * (dot(E, E) - dot(B, B));
        const double G = dot(E, B);
        Vec3 r;
        for (int k = 0; k < 3; ++k) r[k] = (1.0 + 2.0 * a * F) * E[k] + 2.0 * b * G * B[k];
        return r;
      },
      [a, b](const Vec3& E, const Vec3& B, double) {
        const double F = 0.5 * (dot(E, E) - dot(B, B));
        const double G = dot(E, B);
        Vec3 r;
        for (int k = 0; k < 3; ++k) r[k] = -(1.0 + 2.0 * a * F) * B[k] + 2.0 * b * G * E[k];
        return r;
      },
      [](const Vec3&, const Vec3&, double) { return 0.0; });
}

/// |E|^2, the frame-dependent counterexample.
inline EMDensity maxwell_anisotropic_density() {
  return EMDensity::make([](const auto& E, const auto&, auto) { return E[0] * E[0] + E[1] * E[1] + E[2] * E[2]; },
                         [](const Vec3& E, const Vec3&, double) { return Vec3{2 * E[0], 2 * E[1], 2 * E[2]}; },
                         [](const Vec3&, const Vec3&, double) { return Vec3{0, 0, 0}; },
                         [](const Vec3&, const Vec3&, double) { return 0.0; });
}

/// Auxiliary fields D = dL/dE, H = -dL/dB and the energy density W = E.D - L.
struct EMAuxiliary {
  Vec3 D;
  Vec3 H;
  double W;
};

inline EMAuxiliary maxwell_auxiliary(const EMDensity& L, const EMState& st) {
  const Vec3 D = L.dL_dE(st.E, st.B, st.s);
  const Vec3 dB = L.dL_dB(st.E, st.B, st.s);
  return {D, {-dB[0], -dB[1], -dB[2]}, dot(st.E, D) - L.f(st.E, st.B, st.s)};
}

inline LagrangianModel model_maxwell(std::string name, EMDensity L) {
  auto density = [L](auto a, auto s) {
    using T = std::remove_cvref_t<decltype(s)>;
    std::array<T, 3> E, B;
    decode_em<T>(a, E, B);
    if constexpr (std::is_same_v<T, Dual>) {
      return L.f_dual(E, B, s);
    } else {
      return L.f(E, B, s);
    }
  };
  LagrangianModel m = make_lagrangian(std::move(name), 4, 2, density, false);
  m.closed_gradient = [L](std::span<const double> a, double s) {
    Vec3 E, B;
    decode_em<double>(a, E, B);
    return em_gradient_to_coeffs(L.dL_dE(E, B, s), L.dL_dB(E, B, s));
  };
  m.closed_entropy_derivative = [L](std::span<const double> a, double s) {
    Vec3 E, B;
    decode_em<double>(a, E, B);
    return L.dL_ds(E, B, s);
  };
  m.metric_hint = minkowski(4, 1.0);
  m.sampler = [](std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    EMState st;
    for (int k = 0; k < 3; ++k) {
      st.E[k] = 0.7 * n01(rng);
      st.B[k] = 0.7 * n01(rng);
    }
    return encode_em(st);
  };
  m.family = MaxwellFamily{std::move(L)};
  return m;
}

}  // namespace divfree
