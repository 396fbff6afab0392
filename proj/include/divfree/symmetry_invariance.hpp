#pragma once

// Symmetry of S^{-1} T versus invariance of L under the pullback action of the
// neutral component of O(S), tested numerically through the Lie algebra
// g = { N : N^T S + S N = 0 }.

#include "divfree/exterior_algebra.hpp"
#include "divfree/lagrangian.hpp"
#include "divfree/tensor_assembly.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cstdint>
#include <random>
#include <string>

namespace divfree {

/// Symmetric non-degenerate matrix.
class MetricSignature {
 public:
  explicit MetricSignature(Matrix S) : S_(std::move(S)) {
    if (S_.rows() != S_.cols() || S_.rows() == 0) throw std::invalid_argument("MetricSignature: S must be square");
    if (max_abs(S_ - S_.transpose()) > 1e-14 * (1.0 + max_abs(S_))) {
      throw std::invalid_argument("MetricSignature: S must be symmetric");
    }
    const auto lu = S_.fullPivLu();
    if (!lu.isInvertible()) throw std::invalid_argument("MetricSignature: S is singular");
    S_inv_ = lu.inverse();
  }

  static MetricSignature euclidean(int d) { return MetricSignature(Matrix::Identity(d, d)); }
  static MetricSignature minkowski(int d, double c = 1.0) { return MetricSignature(divfree::minkowski(d, c)); }

  const Matrix& matrix() const { return S_; }
  const Matrix& inverse() const { return S_inv_; }
  int dim() const { return static_cast<int>(S_.rows()); }

 private:
  Matrix S_;
  Matrix S_inv_;
};

/// Generators S^{-1}(E_ab - E_ba), a < b, scaled to unit Frobenius norm.
inline std::vector<Matrix> lie_basis(const MetricSignature& S) {
  const int d = S.dim();
  std::vector<Matrix> out;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      Matrix skew = Matrix::Zero(d, d);
      skew(a, b) = 1.0;
      skew(b, a) = -1.0;
      Matrix N = S.inverse() * skew;
      N /= N.norm();
      out.push_back(std::move(N));
    }
  }
  return out;
}

/// Residual of the commutator closure [N_a, N_b] in span(basis), max over pairs.
inline double lie_closure_residual(const std::vector<Matrix>& basis) {
  if (basis.empty()) return 0.0;
  const auto n2 = basis[0].size();
  Matrix cols(n2, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    cols.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vector>(basis[k].data(), n2);
  }
  const auto qr = cols.colPivHouseholderQr();
  double worst = 0.0;
  for (const Matrix& A : basis) {
    for (const Matrix& B : basis) {
      const Matrix C = A * B - B * A;
      const Vector c = Eigen::Map<const Vector>(C.data(), n2);
      const Vector coef = qr.solve(c);
      worst = std::max(worst, (cols * coef - c).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

/// Sign-pattern states (+-1 per coefficient, when 2^C <= 256) that the model
/// accepts, followed by n_random draws from the model's sampler.
inline std::vector<PFormValue> sample_states(const LagrangianModel& model, int n_random, std::uint64_t seed) {
  std::vector<PFormValue> out;
  const int C = model.size();
  if (C <= 8) {
    for (std::uint32_t bits = 0; bits < (1u << C); ++bits) {
      PFormValue a(model.dim, model.degree);
      for (int k = 0; k < C; ++k) a.coeffs[k] = (bits >> k) & 1u ? 1.0 : -1.0;
      if (model.uses_entropy) a.entropy = 0.0;
      if (model.admissible(a)) out.push_back(std::move(a));
    }
  }
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_random; ++k) out.push_back(model.sample(rng));
  return out;
}

/// <dL/dA, d/dt (e^{tN})^* alpha> / (|dL/dA| |alpha|).
inline double invariance_defect_at(const LagrangianModel& model, const Matrix& N, const PFormValue& alpha) {
  const std::vector<double> g = model.gradient(alpha);
  const PFormValue delta = infinitesimal_pullback(N, alpha);
  double dot = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) dot += g[k] * delta.coeffs[k];
  const double scale = norm2(g) * norm2(alpha.coeffs);
  return scale > 0.0 ? std::abs(dot) / scale : 0.0;
}

inline double invariance_defect(const LagrangianModel& model, const MetricSignature& S,
                                const std::vector<PFormValue>& states) {
  if (S.dim() != model.dim) throw std::invalid_argument("invariance_defect: metric dimension mismatch");
  const auto basis = lie_basis(S);
  double worst = 0.0;
  for (const PFormValue& a : states) {
    for (const Matrix& N : basis) worst = std::max(worst, invariance_defect_at(model, N, a));
  }
  return worst;
}

inline double max_symmetry_defect(const LagrangianModel& model, const MetricSignature& S,
                                  const std::vector<PFormValue>& states) {
  double worst = 0.0;
  for (const PFormValue& a : states) worst = std::max(worst, symmetry_defect(assemble_general(model, a).T, S.matrix()));
  return worst;
}

/// max over skew basis matrices A and states of |Tr(S^{-1} A (L I - T^T))|.
inline double trace_identity_defect(const LagrangianModel& model, const MetricSignature& S,
                                    const std::vector<PFormValue>& states) {
  const int d = S.dim();
  double worst = 0.0;
  for (const PFormValue& a : states) {
    const double L = model.evaluate(a);
    const Matrix T = assemble_general(model, a).T;
    const Matrix R = L * Matrix::Identity(d, d) - T.transpose();
    for (int i = 0; i < d; ++i) {
      for (int j = i + 1; j < d; ++j) {
        Matrix A = Matrix::Zero(d, d);
        A(i, j) = 1.0;
        A(j, i) = -1.0;
        worst = std::max(worst, std::abs((S.inverse() * A * R).trace()));
      }
    }
  }
  return worst;
}

/// |L((e^{tN})^* alpha) - L(alpha)|, the finite-t counterpart of the defect.
inline double exponential_drift(const LagrangianModel& model, const Matrix& N, const PFormValue& alpha, double t) {
  const Matrix M = (t * N).exp();
  return std::abs(model.evaluate(pullback(M, alpha)) - model.evaluate(alpha));
}

struct Tolerances {
  double invariant = 1e-10;      // at or below: invariant / symmetric
  double not_invariant = 1e-2;   // at or above: definitely not
};

enum class Classification { Holds, Fails, Inconclusive };

inline Classification classify(double defect, const Tolerances& tol) {
  if (defect <= tol.invariant) return Classification::Holds;
  if (defect >= tol.not_invariant) return Classification::Fails;
  return Classification::Inconclusive;
}

struct Theorem2Report {
  double invariance_defect = 0.0;
  double symmetry_defect = 0.0;
  std::string verdict;
  bool agree = false;
  std::uint64_t seed = 0;
  int n_states = 0;
};

inline Theorem2Report theorem2_check(const LagrangianModel& model, const MetricSignature& S, int n_states,
                                     std::uint64_t seed, const Tolerances& tol = {}) {
  const auto states = sample_states(model, n_states, seed);
  Theorem2Report r;
  r.invariance_defect = invariance_defect(model, S, states);
  r.symmetry_defect = max_symmetry_defect(model, S, states);
  r.seed = seed;
  r.n_states = static_cast<int>(states.size());
  const Classification ci = classify(r.invariance_defect, tol);
  const Classification cs = classify(r.symmetry_defect, tol);
  if (ci == Classification::Inconclusive || cs == Classification::Inconclusive) {
    r.verdict = "inconclusive";
    r.agree = false;
  } else if (ci == cs) {
    r.verdict = ci == Classification::Holds ? "invariant & symmetric" : "not invariant & not symmetric";
    r.agree = true;
  } else {
    r.verdict = ci == Classification::Holds ? "invariant but not symmetric" : "symmetric but not invariant";
    r.agree = false;
  }
  return r;
}

}  // namespace divfree
