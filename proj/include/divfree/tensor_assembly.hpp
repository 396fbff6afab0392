#pragma once

// The divergence-free tensor of the second variational principle,
//   T_ij = L delta_ij - sum_K A_{iK} dL/dA_{jK},
// K running over (p-1)-subsets with i, j not in K, together with the closed
// forms it reduces to for (d-1)-forms, classical and relativistic gases, and
// electromagnetism.
//
// Sign convention: this is the one definition of T used throughout. The
// isotropic 1-form tensor  p (x) dL/dp - L I  of the classical calculus of
// variations is -T.

#include "divfree/lagrangian.hpp"
#include "divfree/models.hpp"

#include <optional>
#include <stdexcept>

namespace divfree {

struct TensorValue {
  Matrix T;
  std::optional<Matrix> metric;
};

/// General assembly; reads L and dL/dA only (never dL/ds).
inline TensorValue assemble_general(const LagrangianModel& model, const PFormValue& alpha) {
  model.check_shape(alpha);
  const int d = alpha.dim;
  const double L = model.evaluate(alpha);
  TensorValue out{L * Matrix::Identity(d, d), model.metric_hint};
  if (alpha.degree == 0) return out;
  const std::vector<double> g = model.gradient(alpha);
  const FormBasis& B = alpha.basis();
  for (const MultiIndex& K : B.lower()) {
    const std::uint32_t km = K.mask();
    for (int i = 0; i < d; ++i) {
      if (km & (1u << i)) continue;
      const auto [si, sgn_i] = B.slot_of_prefixed(i, K);
      const double a_iK = sgn_i * alpha.coeffs[si];
      if (a_iK == 0.0) continue;
      for (int j = 0; j < d; ++j) {
        if (km & (1u << j)) continue;
        const auto [sj, sgn_j] = B.slot_of_prefixed(j, K);
        out.T(i, j) -= a_iK * sgn_j * g[sj];
      }
    }
  }
  return out;
}

/// dL/dm for (d-1)-form models, from the coefficient gradient.
inline std::vector<double> flux_gradient(const LagrangianModel& model, const PFormValue& alpha) {
  const std::vector<double> g = model.gradient(alpha);
  const int d = alpha.dim;
  std::vector<double> dm(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) dm[i] = (i % 2 ? -1.0 : 1.0) * g[hat_slot(d, i)];
  return dm;
}

/// T = dL/dm (x) m + (L - m . dL/dm) I for (d-1)-forms.
inline TensorValue assemble_nform(const LagrangianModel& model, std::span<const double> m, double s) {
  if (model.degree != model.dim - 1) throw std::invalid_argument("assemble_nform: model is not a (d-1)-form model");
  if (static_cast<int>(m.size()) != model.dim) throw std::invalid_argument("assemble_nform: flux length != d");
  const PFormValue alpha = encode_nform(m, s);
  const double L = model.evaluate(alpha);
  const std::vector<double> dm = flux_gradient(model, alpha);
  double mdm = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) mdm += m[k] * dm[k];
  const int d = model.dim;
  TensorValue out{(L - mdm) * Matrix::Identity(d, d), model.metric_hint};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) out.T(i, j) += dm[i] * m[j];
  }
  return out;
}

struct GasTensors {
  Matrix T;
  Matrix T_prime;  // first row replaced by m = (rho, q)
  double pressure;
};

inline GasTensors assemble_gas(const ScalarProfile& g, const GasState& st) {
  if (!(st.rho > 0.0)) throw DomainError("assemble_gas: rho <= 0");
  const int n = static_cast<int>(st.q.size());
  const double rho = st.rho;
  double q2 = 0.0;
  for (double x : st.q) q2 += x * x;
  const double gv = g.f(rho, st.s);
  const double dg = g.df_dx(rho, st.s);
  const double p = rho * dg - gv;
  Matrix T(n + 1, n + 1);
  T(0, 0) = -q2 / (2.0 * rho) - gv;
  for (int j = 0; j < n; ++j) {
    T(0, j + 1) = -(q2 / (2.0 * rho * rho) + dg) * st.q[j];
    T(j + 1, 0) = st.q[j];
    for (int k = 0; k < n; ++k) T(j + 1, k + 1) = st.q[j] * st.q[k] / rho + (j == k ? p : 0.0);
  }
  Matrix Tp = T;
  Tp(0, 0) = rho;
  for (int j = 0; j < n; ++j) Tp(0, j + 1) = st.q[j];
  return {T, Tp, p};
}

struct RelativisticTensors {
  Matrix T;
  Matrix T_prime;  // -Lambda^{-1} T
  RelativisticThermo thermo;
};

inline RelativisticTensors assemble_relativistic(const ScalarProfile& rest, const RelativisticState& st) {
  const double c = st.c;
  const int d = static_cast<int>(st.m.size());
  const double rho = st.rho();
  const std::vector<double> u = st.velocity();
  const RelativisticThermo th = relativistic_thermo(rest, c, rho, st.s);
  const double L = rest.f(rho, st.s);
  const double rdL = rho * rest.df_dx(rho, st.s);
  const Matrix Lam = minkowski(d, c);
  Matrix Lam_inv = Matrix::Identity(d, d);
  Lam_inv(0, 0) = -1.0 / (c * c);
  const Vector ue = to_eigen(u);

  const Matrix T_prime = rdL * ue * ue.transpose() + (rdL - L) * Lam_inv;
  const Matrix T_prime_thermo = (th.e * c * c + th.p) * ue * ue.transpose() + th.p * Lam_inv;
  const double scale = 1.0 + max_abs(T_prime);
  if (max_abs(T_prime - T_prime_thermo) > 1e-12 * scale) {
    throw std::logic_error("assemble_relativistic: the two forms of T' disagree");
  }
  return {-Lam * T_prime, T_prime, th};
}

struct MaxwellTensors {
  Matrix T;
  Matrix T_tilde;  // diag(-1, 1, 1, 1) T
  EMAuxiliary aux;
};

inline MaxwellTensors assemble_maxwell(const EMDensity& density, const EMState& st) {
  const EMAuxiliary aux = maxwell_auxiliary(density, st);
  const double L = density.f(st.E, st.B, st.s);
  const Vec3 HxE = cross(aux.H, st.E);
  const Vec3 DxB = cross(aux.D, st.B);
  Matrix T(4, 4);
  T(0, 0) = L - dot(st.E, aux.D);
  const double diag = L + dot(st.B, aux.H);
  for (int a = 0; a < 3; ++a) {
    T(0, a + 1) = HxE[a];
    T(a + 1, 0) = DxB[a];
    for (int b = 0; b < 3; ++b) {
      T(a + 1, b + 1) = (a == b ? diag : 0.0) - st.E[a] * aux.D[b] - aux.H[a] * st.B[b];
    }
  }
  Matrix Tt = T;
  Tt.row(0) *= -1.0;
  return {T, Tt, aux};
}

/// max |S^{-1}T - (S^{-1}T)^T|.
inline double symmetry_defect(const Matrix& T, const Matrix& S) {
  if (S.rows() != T.rows() || S.cols() != T.cols()) throw std::invalid_argument("symmetry_defect: shape mismatch");
  const auto lu = S.fullPivLu();
  if (!lu.isInvertible()) throw std::invalid_argument("symmetry_defect: singular metric");
  const Matrix X = lu.solve(T);
  return max_abs(X - X.transpose());
}

inline double symmetry_defect(const TensorValue& tv, const Matrix& S) { return symmetry_defect(tv.T, S); }

}  // namespace divfree
