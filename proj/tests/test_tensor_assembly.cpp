#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace divfree;
using namespace divfree::testing;

namespace {

/// T_ij = L delta_ij - (1/(p-1)!) sum over ordered (p-1)-tuples K of
/// A_{iK} dL/dA_{jK}, reading every coefficient through a raw tuple.
Matrix brute_force_tensor(const LagrangianModel& m, const PFormValue& a) {
  const int d = a.dim, p = a.degree;
  const double L = m.evaluate(a);
  Matrix T = L * Matrix::Identity(d, d);
  if (p == 0) return T;
  double fact = 1.0;
  for (int k = 2; k < p; ++k) fact *= k;
  std::vector<int> K(static_cast<std::size_t>(p - 1), 0);
  const auto advance = [&] {
    for (int k = p - 2; k >= 0; --k) {
      if (++K[k] < d) return true;
      K[k] = 0;
    }
    return false;
  };
  bool more = true;
  while (more) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        std::vector<int> iK{i}, jK{j};
        iK.insert(iK.end(), K.begin(), K.end());
        jK.insert(jK.end(), K.begin(), K.end());
        T(i, j) -= a.coeff(iK) * m.gradient_at(a, jK) / fact;
      }
    }
    more = p > 1 && advance();
  }
  return T;
}

LagrangianModel random_quadratic(std::mt19937_64& rng, int d, int p) {
  const int C = static_cast<int>(binomial(d, p));
  const Matrix Q = random_matrix(rng, C);
  const Vector b = to_eigen(random_form(rng, d, p).coeffs);
  auto fn = [Q, b, C](auto a, auto) {
    using T = std::remove_cvref_t<decltype(a[0])>;
    T acc = 0.0;
    for (int i = 0; i < C; ++i) {
      acc += b[i] * a[i];
      for (int j = 0; j < C; ++j) acc += Q(i, j) * a[i] * a[j];
    }
    return acc;
  };
  return make_lagrangian("quadratic", d, p, fn);
}

}  // namespace

TEST(General, ConstantDensityGivesScaledIdentity) {
  const LagrangianModel m = model_expression("3", 4, 2);
  std::mt19937_64 rng(1);
  const Matrix T = assemble_general(m, random_form(rng, 4, 2)).T;
  EXPECT_EQ(T, 3.0 * Matrix::Identity(4, 4));
}

TEST(General, IsotropicOneFormIsMinusClassicalTensor) {
  const LagrangianModel m = make_model("iso-p1");
  const auto& ell = std::get<IsotropicFamily>(m.family).ell;
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const PFormValue a = m.sample(rng);
    const Vector A = to_eigen(a.coeffs);
    const double r = A.norm();
    const double L = m.evaluate(a);
    const Matrix classical = ell.df_dx(r, a.entropy_or_zero()) / r * A * A.transpose() - L * Matrix::Identity(3, 3);
    EXPECT_LT(rel_diff(assemble_general(m, a).T, -classical), 1e-13);
  }
}

TEST(General, GasHandOracle) {
  const LagrangianModel m = make_model("gas", {{"gamma", "2"}});
  const PFormValue a = encode_gas({1.0, {1.0}, 0.0});
  Matrix expect(2, 2);
  expect << -1.0, -1.5, 1.0, 1.5;
  EXPECT_LT(max_abs(assemble_general(m, a).T - expect), 1e-15);
  EXPECT_LT(max_abs(assemble_nform(m, decode_nform(a), 0.0).T - expect), 1e-15);
  const GasTensors g = assemble_gas(polytropic_energy(2.0), {1.0, {1.0}, 0.0});
  EXPECT_LT(max_abs(g.T - expect), 1e-15);
  Matrix tp(2, 2);
  tp << 1.0, 1.0, 1.0, 1.5;
  EXPECT_LT(max_abs(g.T_prime - tp), 1e-15);
}

TEST(General, MatchesBruteForceOverAllOrderings) {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 5; ++d) {
    for (int p = 0; p <= d; ++p) {
      const LagrangianModel m = random_quadratic(rng, d, p);
      for (int t = 0; t < 5; ++t) {
        const PFormValue a = random_form(rng, d, p);
        EXPECT_LT(rel_diff(assemble_general(m, a).T, brute_force_tensor(m, a)), 1e-12) << d << "," << p;
      }
    }
  }
}

TEST(General, NeverReadsEntropyDerivative) {
  LagrangianModel m = make_model("gas", {{"n", "2"}});
  std::mt19937_64 rng(4);
  const PFormValue a = m.sample(rng);
  const Matrix before = assemble_general(m, a).T;
  m.closed_entropy_derivative = [](std::span<const double>, double) -> double {
    throw std::logic_error("dL/ds must not be read");
  };
  EXPECT_EQ(assemble_general(m, a).T, before);
}

TEST(General, EntropyEntersOnlyThroughL) {
  // For isothermal g the pressure rho dg/drho - g does not depend on s, so the
  // spatial block is unchanged while row 0 moves with dL/drho.
  const LagrangianModel m = make_model("gas", {{"n", "2"}, {"g", "isothermal"}});
  PFormValue a = encode_gas({1.3, {0.2, -0.4}, 0.0});
  const Matrix T0 = assemble_general(m, a).T;
  a.entropy = 0.8;
  const Matrix T1 = assemble_general(m, a).T;
  EXPECT_LT(max_abs(T0.bottomRightCorner(2, 2) - T1.bottomRightCorner(2, 2)), 1e-14);
  EXPECT_LT(max_abs(T0.bottomLeftCorner(2, 1) - T1.bottomLeftCorner(2, 1)), 1e-14);
}

TEST(NForm, HomogeneousDegreeOneHasNoScalarPart) {
  const LagrangianModel m = model_expression("sqrt(A01^2 + A02^2 + A12^2)", 3, 2);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const PFormValue a = random_form(rng, 3, 2);
    const auto mm = decode_nform(a);
    const auto dm = flux_gradient(m, a);
    const Matrix T = assemble_nform(m, mm, 0.0).T;
    EXPECT_LT(max_abs(T - to_eigen(dm) * to_eigen(mm).transpose()), 1e-14);
  }
}

TEST(Oracle, NFormEqualsGeneral) {
  std::mt19937_64 rng(6);
  for (int d = 2; d <= 5; ++d) {
    const LagrangianModel m = random_quadratic(rng, d, d - 1);
    for (int t = 0; t < 100; ++t) {
      const PFormValue a = random_form(rng, d, d - 1);
      EXPECT_LT(rel_diff(assemble_nform(m, decode_nform(a), 0.0).T, assemble_general(m, a).T), 1e-12);
    }
  }
}

TEST(Oracle, GasEqualsGeneral) {
  for (int n : {1, 2, 3}) {
    for (const char* g : {"polytropic", "isothermal"}) {
      const LagrangianModel m = make_model("gas", {{"n", std::to_string(n)}, {"g", g}});
      const auto& fam = std::get<GasFamily>(m.family);
      std::mt19937_64 rng(7);
      for (int t = 0; t < 100; ++t) {
        const PFormValue a = m.sample(rng);
        EXPECT_LT(rel_diff(assemble_gas(fam.g, decode_gas(a)).T, assemble_general(m, a).T), 1e-12);
      }
    }
  }
}

TEST(Oracle, RelativisticEqualsGeneral) {
  for (const char* name : {"relativistic", "relativistic-powerlaw", "relativistic-limit"}) {
    for (double c : {1.0, 3.0}) {
      const LagrangianModel m = make_model(name, {{"c", num(c)}});
      const auto& fam = std::get<RelativisticFamily>(m.family);
      std::mt19937_64 rng(8);
      for (int t = 0; t < 100; ++t) {
        const PFormValue a = m.sample(rng);
        const RelativisticTensors rt = assemble_relativistic(fam.rest, {decode_nform(a), fam.c, a.entropy_or_zero()});
        EXPECT_LT(rel_diff(rt.T, assemble_general(m, a).T), 1e-12) << name;
      }
    }
  }
}

TEST(Oracle, MaxwellEqualsGeneral) {
  for (const char* name : {"maxwell-linear", "maxwell-lorentz", "maxwell-anisotropic"}) {
    const LagrangianModel m = make_model(name);
    const auto& fam = std::get<MaxwellFamily>(m.family);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 100; ++t) {
      const PFormValue a = m.sample(rng);
      EXPECT_LT(rel_diff(assemble_maxwell(fam.density, decode_em(a)).T, assemble_general(m, a).T), 1e-12) << name;
    }
  }
}

TEST(Gas, StaticStateIsDiagonal) {
  const ScalarProfile g = polytropic_energy(1.4);
  const GasTensors gt = assemble_gas(g, {1.6, {0.0, 0.0, 0.0}, 0.3});
  const double p = gas_pressure(g, 1.6, 0.3);
  Matrix expect = p * Matrix::Identity(4, 4);
  expect(0, 0) = -g.f(1.6, 0.3);
  EXPECT_LT(max_abs(gt.T - expect), 1e-14);
  EXPECT_DOUBLE_EQ(gt.pressure, p);
}

TEST(Gas, ModifiedTensorIsSymmetric) {
  const LagrangianModel m = make_model("gas", {{"n", "3"}});
  const auto& fam = std::get<GasFamily>(m.family);
  std::mt19937_64 rng(10);
  for (int t = 0; t < 100; ++t) {
    const GasTensors gt = assemble_gas(fam.g, decode_gas(m.sample(rng)));
    EXPECT_LT(max_abs(gt.T_prime - gt.T_prime.transpose()), 1e-12);
  }
  EXPECT_THROW(assemble_gas(fam.g, {-1.0, {0.0, 0.0, 0.0}, 0.0}), DomainError);
}

TEST(Relativistic, RestStateAndSymmetry) {
  const ScalarProfile L = rest_plus_internal_density(5.0 / 3.0, 2.0);
  const RelativisticTensors rest = assemble_relativistic(L, {{0.6, 0.0, 0.0, 0.0}, 2.0, 0.1});
  const Matrix off = rest.T_prime - Matrix(rest.T_prime.diagonal().asDiagonal());
  EXPECT_LT(max_abs(off), 1e-15);

  const LagrangianModel m = make_model("relativistic", {{"c", "2"}});
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const PFormValue a = m.sample(rng);
    const RelativisticTensors rt = assemble_relativistic(L, {decode_nform(a), 2.0, a.entropy_or_zero()});
    EXPECT_LT(max_abs(rt.T_prime - rt.T_prime.transpose()), 1e-12 * (1.0 + max_abs(rt.T_prime)));
    EXPECT_LT(symmetry_defect(rt.T, -minkowski(4, 2.0)), 1e-12 * (1.0 + max_abs(rt.T)));
    EXPECT_LT(max_abs(rt.T + minkowski(4, 2.0) * rt.T_prime), 1e-12 * (1.0 + max_abs(rt.T)));
  }
  EXPECT_THROW(assemble_relativistic(L, {{1.0, 3.0, 0.0, 0.0}, 2.0, 0.0}), DomainError);
}

TEST(Relativistic, TraceFollowsPressureLaw) {
  // tr(Lambda T') = -e c^2 + 3 p, which vanishes in the ultrarelativistic case.
  std::mt19937_64 rng(12);
  for (double kappa : {1.1, 4.0 / 3.0, 1.9}) {
    const LagrangianModel m = make_model("relativistic-powerlaw", {{"kappa", num(kappa)}});
    const auto& fam = std::get<RelativisticFamily>(m.family);
    for (int t = 0; t < 20; ++t) {
      const PFormValue a = m.sample(rng);
      const RelativisticTensors rt = assemble_relativistic(fam.rest, {decode_nform(a), 1.0, a.entropy_or_zero()});
      const double tr = (minkowski(4, 1.0) * rt.T_prime).trace();
      EXPECT_NEAR(tr, -rt.thermo.e + 3.0 * rt.thermo.p, 1e-12 * (1.0 + std::abs(rt.thermo.e)));
      if (std::abs(kappa - 4.0 / 3.0) < 1e-12) {
        EXPECT_NEAR(tr, 0.0, 1e-12 * rt.thermo.e);
      }
    }
  }
}

TEST(Maxwell, HandOracle) {
  const MaxwellTensors mt = assemble_maxwell(maxwell_linear_density(), {{1, 0, 0}, {0, 1, 0}, 0.0});
  EXPECT_DOUBLE_EQ(mt.T(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(mt.T(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(mt.T(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(mt.T(0, 3), -1.0);
  EXPECT_EQ(mt.T_tilde.row(0), -mt.T.row(0));
  EXPECT_EQ(mt.T_tilde.bottomRows(3), mt.T.bottomRows(3));
}

TEST(Maxwell, VacuumIsScaledIdentity) {
  const EMDensity L = maxwell_lorentz_density(0.2, 0.3);
  EXPECT_EQ(assemble_maxwell(L, {}).T, L.f({}, {}, 0.0) * Matrix::Identity(4, 4));
}

TEST(SymmetryDefect, LorentzSymmetricAnisotropicNot) {
  const Matrix S = minkowski(4, 1.0);
  const LagrangianModel lor = make_model("maxwell-lorentz");
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) EXPECT_LT(symmetry_defect(assemble_general(lor, lor.sample(rng)), S), 1e-12);
  const LagrangianModel an = make_model("maxwell-anisotropic");
  EXPECT_GT(symmetry_defect(assemble_general(an, encode_em({{1, 0, 0}, {0, 1, 0}, 0.0})), S), 0.1);
  EXPECT_THROW(symmetry_defect(Matrix::Identity(2, 2), Matrix::Zero(2, 2)), std::invalid_argument);
}
