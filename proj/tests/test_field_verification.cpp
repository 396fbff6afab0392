#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace divfree;
using namespace divfree::testing;

namespace {

using FormFn = std::function<PFormValue(std::span<const double>)>;

/// Sum of a few random Fourier modes per coefficient on top of a constant.
FormFn random_smooth_form(std::mt19937_64& rng, int d, int p, double amp = 0.4) {
  std::normal_distribution<double> n01;
  const int C = static_cast<int>(binomial(d, p));
  const int modes = 3;
  std::vector<double> base(static_cast<std::size_t>(C)), coef(static_cast<std::size_t>(C * modes)),
      phase(static_cast<std::size_t>(C * modes)), k(static_cast<std::size_t>(C * modes * d));
  for (double& x : base) x = n01(rng);
  for (double& x : coef) x = amp * n01(rng);
  for (double& x : phase) x = 3.0 * n01(rng);
  for (double& x : k) x = 2.0 * n01(rng);
  return [=](std::span<const double> y) {
    PFormValue a(d, p);
    for (int c = 0; c < C; ++c) {
      double v = base[c];
      for (int m = 0; m < modes; ++m) {
        double arg = phase[c * modes + m];
        for (int j = 0; j < d; ++j) arg += k[(c * modes + m) * d + j] * y[j];
        v += coef[c * modes + m] * std::sin(arg);
      }
      a.coeffs[c] = v;
    }
    return a;
  };
}

/// Quadratic plus a quartic term, defined for every (d, p).
LagrangianModel generic_quartic(std::mt19937_64& rng, int d, int p) {
  const int C = static_cast<int>(binomial(d, p));
  const Matrix Q = random_matrix(rng, C, 0.5);
  auto fn = [Q, C](auto a, auto) {
    using T = std::remove_cvref_t<decltype(a[0])>;
    T acc = 0.0, r2 = 0.0;
    for (int i = 0; i < C; ++i) {
      r2 += a[i] * a[i];
      for (int j = 0; j < C; ++j) acc += Q(i, j) * a[i] * a[j];
    }
    return acc + 0.1 * r2 * r2;
  };
  return make_lagrangian("generic-quartic", d, p, fn);
}

AnalyticVectorField random_bump(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  Vector a(d);
  for (int k = 0; k < d; ++k) a[k] = n01(rng);
  return bump_vector_field(Vector::Constant(d, 0.5), 0.35, a, random_matrix(rng, d));
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

// ---------------------------------------------------------------------------

TEST(Closedness, ConstantFieldIsClosed) {
  std::mt19937_64 rng(1);
  const PFormValue c = random_form(rng, 3, 1);
  const GridField F = sample_field(GridGeometry::cube(3, 5, 0.25), 1, false, [&](auto) { return c; });
  EXPECT_EQ(closedness_residual(F), 0.0);
  EXPECT_THROW(closedness_residual(sample_field(GridGeometry::cube(2, 2, 0.5), 1, false, [&](auto) {
                 return PFormValue(2, 1);
               })),
               std::invalid_argument);
}

TEST(Closedness, PlaneWaveConvergesAtSecondOrder) {
  const ManufacturedField& mf = manufactured("maxwell-plane-wave");
  const double r1 = closedness_residual(mf.sample(1.0 / 8)), r2 = closedness_residual(mf.sample(1.0 / 16));
  EXPECT_LT(r2, 1e-2);
  EXPECT_GE(observed_order(r1, r2), 1.9);
  // Along a grid axis with equal spacings the two stencils cancel identically.
  EXPECT_LT(closedness_residual(manufactured("maxwell-plane-wave-x1").sample(1.0 / 8)), 1e-13);
}

TEST(Closedness, ExactFormsAreClosed) {
  // alpha = d beta for beta = sum_I b_I(y) dy_I with trigonometric b_I.
  std::mt19937_64 rng(2);
  for (int d = 2; d <= 4; ++d) {
    for (int p = 1; p < d; ++p) {
      const FormFn beta_fn = random_smooth_form(rng, d, p - 1, 0.5);
      // d beta by a fourth-order difference of the analytic beta at each point
      const FormFn alpha_fn = [=](std::span<const double> y) {
        PFormValue a(d, p);
        const FormBasis& B = form_basis(d, p);
        const FormBasis& Bl = form_basis(d, p - 1);
        const double e = 1e-3;
        std::vector<double> yy(y.begin(), y.end());
        for (int k = 0; k < d; ++k) {
          auto at = [&](double off) {
            yy[k] = y[k] + off;
            const PFormValue b = beta_fn(yy);
            yy[k] = y[k];
            return b;
          };
          const PFormValue bp = at(e), bm = at(-e), bp2 = at(2 * e), bm2 = at(-2 * e);
          for (int s = 0; s < Bl.size(); ++s) {
            if (Bl[s].mask() >> k & 1u) continue;
            const double db = (8.0 * (bp.coeffs[s] - bm.coeffs[s]) - (bp2.coeffs[s] - bm2.coeffs[s])) / (12.0 * e);
            const auto [slot, sign] = B.slot_of_prefixed(k, Bl[s]);
            a.coeffs[slot] += sign * db;
          }
        }
        return a;
      };
      const double r1 = closedness_residual(sample_field(GridGeometry::cube(d, 9, 1.0 / 8), p, false, alpha_fn));
      const double r2 = closedness_residual(sample_field(GridGeometry::cube(d, 17, 1.0 / 16), p, false, alpha_fn));
      EXPECT_LT(r2, 0.3 * r1) << d << "," << p;
      EXPECT_GE(observed_order(r1, r2), 1.9) << d << "," << p;
    }
  }
}

TEST(DivT, UniformStatesAreConserved) {
  for (const char* name : {"gas-uniform", "relativistic-uniform"}) {
    const ManufacturedField& mf = manufactured(name);
    const LagrangianModel m = make_model(mf.model, parse_params(mf.model_params));
    EXPECT_LE(max_of(div_T_residual(m, mf.sample(0.25))), 1e-13) << name;
  }
}

TEST(DivT, PlaneWaveConvergesOnEveryRow) {
  const ManufacturedField& mf = manufactured("maxwell-plane-wave");
  const LagrangianModel m = make_model(mf.model);
  const auto r1 = div_T_residual(m, mf.sample(1.0 / 8)), r2 = div_T_residual(m, mf.sample(1.0 / 16));
  for (int i = 0; i < 4; ++i) {
    EXPECT_GT(r1[i], 0.0);
    EXPECT_GE(observed_order(r1[i], r2[i]), 1.9) << "row " << i;
  }
}

TEST(DivT, NonSolutionGasMatchesExactDivergence) {
  // rho = 1 + x^2, q = 0, g = rho^2/2: (Div T)_1 = d_x (rho^2/2) = 2x (1 + x^2).
  const ManufacturedField& mf = manufactured("gas-static-nonuniform");
  const LagrangianModel m = make_model(mf.model, parse_params(mf.model_params));
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const GridField F = mf.sample(h);
    const auto div = divergence_field(F, [&](const PFormValue& a) { return assemble_general(m, a).T; });
    const GridGeometry& g = F.geometry();
    for (std::size_t c = 0; c < F.size(); ++c) {
      const auto idx = g.unravel(c);
      if (!g.interior(idx)) continue;
      const double x = g.position(c)[1];
      EXPECT_NEAR(div[2 * c], 0.0, 1e-12);
      EXPECT_NEAR(div[2 * c + 1], 2.0 * x * (1.0 + x * x), 3.0 * h * h);
    }
    EXPECT_GT(div_T_residual(m, F)[1], 2.0);
  }
}

TEST(DivT, ModifiedGasTensorRowsMatchAndRowZeroIsMass) {
  std::mt19937_64 rng(3);
  const LagrangianModel m = make_model("gas", {{"n", "2"}});
  const auto& fam = std::get<GasFamily>(m.family);
  const GridGeometry g = GridGeometry::cube(3, 9, 1.0 / 8);
  const GridField F = sample_field(g, 2, true, [](std::span<const double> y) {
    return encode_gas({1.5 + 0.3 * std::sin(y[0] + 2 * y[1]), {std::cos(y[1] - y[0]), 0.4 * y[2] * y[2]}, 0.1 * y[1]});
  });
  const auto divT = divergence_field(F, [&](const PFormValue& a) { return assemble_gas(fam.g, decode_gas(a)).T; });
  const auto divTp = divergence_field(F, [&](const PFormValue& a) { return assemble_gas(fam.g, decode_gas(a)).T_prime; });
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (!g.interior(g.unravel(c))) continue;
    for (int i = 1; i < 3; ++i) EXPECT_EQ(divT[3 * c + i], divTp[3 * c + i]);
    double mass = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double up = decode_gas(F.at(c + g.stride(j))).flux()[j];
      const double dn = decode_gas(F.at(c - g.stride(j))).flux()[j];
      mass += (up - dn) / (2.0 * g.spacing[j]);
    }
    EXPECT_NEAR(divTp[3 * c], mass, 1e-13);
  }
}

TEST(DivT, MaxwellRowZeroIsPoyntingResidual) {
  // T_00 = -W and T_0j = -(E x H)_j, so row 0 is minus the Poynting residual.
  std::mt19937_64 rng(4);
  const LagrangianModel m = make_model("maxwell-lorentz");
  const auto& L = std::get<MaxwellFamily>(m.family).density;
  const GridGeometry g = GridGeometry::cube(4, 7, 1.0 / 6);
  const GridField F = sample_field(g, 2, false, random_smooth_form(rng, 4, 2));
  const auto div = div_T_residual(m, F);
  const auto field = divergence_field(F, [&](const PFormValue& a) { return assemble_general(m, a).T; });
  std::vector<double> W(F.size());
  std::vector<Vec3> S(F.size());
  for (std::size_t c = 0; c < F.size(); ++c) {
    const EMState st = decode_em(F.at(c));
    const EMAuxiliary aux = maxwell_auxiliary(L, st);
    W[c] = aux.W;
    S[c] = cross(st.E, aux.H);
  }
  for (std::size_t c = 0; c < F.size(); ++c) {
    if (!g.interior(g.unravel(c))) continue;
    const std::size_t s0 = g.stride(0);
    double poynting = (W[c + s0] - W[c - s0]) / (2.0 * g.spacing[0]);
    for (int a = 0; a < 3; ++a) {
      const std::size_t s = g.stride(a + 1);
      poynting += (S[c + s][a] - S[c - s][a]) / (2.0 * g.spacing[a + 1]);
    }
    EXPECT_NEAR(field[4 * c], -poynting, 1e-13 * (1.0 + std::abs(poynting)));
  }
  EXPECT_GT(div[0], 0.0);
}

// ---------------------------------------------------------------------------

TEST(FirstVariation, ZeroVectorFieldGivesZero) {
  std::mt19937_64 rng(5);
  const LagrangianModel m = generic_quartic(rng, 2, 1);
  const AnalyticVectorField xi = bump_vector_field(Vector::Constant(2, 0.5), 0.35, Vector::Zero(2), Matrix::Zero(2, 2));
  const auto r = first_variation(m, GridGeometry::cube(2, 9, 1.0 / 8), random_smooth_form(rng, 2, 1), xi, 1e-2);
  EXPECT_EQ(r.numeric_derivative, 0.0);
  EXPECT_EQ(r.tensor_pairing, 0.0);
  EXPECT_EQ(r.divergence_pairing, 0.0);
}

TEST(FirstVariation, UniformStatesAreCritical) {
  std::mt19937_64 rng(6);
  for (int d : {2, 3}) {
    const LagrangianModel m = generic_quartic(rng, d, 1);
    const PFormValue c = random_form(rng, d, 1);
    const AnalyticVectorField xi = random_bump(rng, d);
    double num[2], ten[2];
    for (int lev = 0; lev < 2; ++lev) {
      const int n = (d == 2 ? 64 : 16) << lev;
      const auto r = first_variation(m, GridGeometry::cube(d, n + 1, 1.0 / n), [&](auto) { return c; }, xi, 0.5 / n);
      num[lev] = std::abs(r.numeric_derivative);
      ten[lev] = std::abs(r.tensor_pairing);
    }
    EXPECT_GE(observed_order(num[0], num[1]), 1.9) << d;
    EXPECT_GE(observed_order(ten[0], ten[1]), 1.9) << d;
  }
}

TEST(FirstVariation, ConvergesUnderJointRefinement) {
  struct Case {
    int d, p;
  };
  for (const Case& cs : {Case{2, 1}, Case{2, 2}, Case{3, 1}, Case{3, 2}}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      std::mt19937_64 rng(seed);
      const LagrangianModel m = generic_quartic(rng, cs.d, cs.p);
      const FormFn form = random_smooth_form(rng, cs.d, cs.p);
      const AnalyticVectorField xi = random_bump(rng, cs.d);
      double err[2];
      for (int lev = 0; lev < 2; ++lev) {
        const int n = (cs.d == 2 ? 64 : 16) << lev;
        const double h = 1.0 / n;
        const auto r = first_variation(m, GridGeometry::cube(cs.d, n + 1, h), form, xi, 0.5 * h);
        err[lev] = std::abs(r.numeric_derivative - r.tensor_pairing);
      }
      EXPECT_GE(observed_order(err[0], err[1]), 1.9) << cs.d << "," << cs.p << " seed " << seed;
    }
  }
}

TEST(FirstVariation, DiscreteSummationByParts) {
  std::mt19937_64 rng(7);
  for (int d : {2, 3}) {
    const LagrangianModel m = generic_quartic(rng, d, d - 1);
    const FormFn form = random_smooth_form(rng, d, d - 1);
    const AnalyticVectorField xi = random_bump(rng, d);
    double gap[2];
    for (int lev = 0; lev < 2; ++lev) {
      const int n = (d == 2 ? 64 : 16) << lev;
      const auto r = first_variation(m, GridGeometry::cube(d, n + 1, 1.0 / n), form, xi, 1e-3);
      gap[lev] = std::abs(r.tensor_pairing - r.divergence_pairing);
    }
    EXPECT_GE(observed_order(gap[0], gap[1]), 1.9) << d;
  }
}

TEST(FirstVariation, GridFieldVariantTracksAnalyticSource) {
  std::mt19937_64 rng(8);
  const LagrangianModel m = generic_quartic(rng, 2, 1);
  const FormFn form = random_smooth_form(rng, 2, 1);
  const AnalyticVectorField xi = random_bump(rng, 2);
  double err[2];
  for (int lev = 0; lev < 2; ++lev) {
    const double h = 1.0 / (64 << lev);
    const GridGeometry g = GridGeometry::cube(2, (64 << lev) + 1, h);
    const auto grid = first_variation(m, sample_field(g, 1, false, form), VariationField::sample(g, xi.value), 0.5 * h);
    err[lev] = std::abs(grid.numeric_derivative - grid.tensor_pairing);
  }
  EXPECT_GE(observed_order(err[0], err[1]), 1.9);
}

TEST(FirstVariation, EntropyIsTransportedWithTheFlow) {
  std::mt19937_64 rng(9);
  const LagrangianModel m = make_model("gas", {{"gamma", "1.4"}});
  const FormFn form = [](std::span<const double> y) {
    return encode_gas({1.2 + 0.2 * std::sin(3 * y[0] + y[1]), {0.5 * std::cos(2 * y[1])}, 0.3 * std::sin(4 * y[1] - y[0])});
  };
  const AnalyticVectorField xi = random_bump(rng, 2);
  double err[2];
  for (int lev = 0; lev < 2; ++lev) {
    const double h = 1.0 / (64 << lev);
    const auto r = first_variation(m, GridGeometry::cube(2, (64 << lev) + 1, h), form, xi, 0.5 * h);
    err[lev] = std::abs(r.numeric_derivative - r.tensor_pairing);
  }
  EXPECT_GE(observed_order(err[0], err[1]), 1.9);
}

TEST(FirstVariation, Errors) {
  std::mt19937_64 rng(10);
  const LagrangianModel m = generic_quartic(rng, 2, 1);
  const GridGeometry g = GridGeometry::cube(2, 9, 1.0 / 8);
  const AnalyticVectorField xi = bump_vector_field(Vector::Constant(2, 0.5), 0.35, Vector::Constant(2, 40.0), Matrix::Zero(2, 2));
  EXPECT_THROW(first_variation(m, g, random_smooth_form(rng, 2, 1), xi, 1.0), std::out_of_range);
  EXPECT_THROW(first_variation(m, g, random_smooth_form(rng, 2, 1), xi, 1e-3, FlowOptions{4}), std::invalid_argument);
  EXPECT_THROW(VariationField(g, std::vector<double>(g.count() * 2, 1.0)), std::invalid_argument);
}

TEST(Flow, RK4FlowOfLinearFieldMatchesExponential) {
  std::mt19937_64 rng(11);
  const Matrix A = random_matrix(rng, 3, 0.5);
  const AnalyticVectorField lin{[A](std::span<const double> y) -> Vector { return A * Eigen::Map<const Vector>(y.data(), 3); },
                                [A](std::span<const double>) -> Matrix { return A; }};
  const std::vector<double> y0{0.2, -0.4, 0.9};
  const FlowPoint fp = integrate_flow(lin, y0, 0.3, 8);
  const Matrix E = (0.3 * A).exp();
  EXPECT_LT(max_abs(fp.M - E), 1e-8);
  EXPECT_LT(max_abs(to_std(fp.y - E * to_eigen(y0))), 1e-8);
}

// ---------------------------------------------------------------------------

TEST(Entropy, ConstantEntropyIsTransported) {
  const LagrangianModel m = make_model("gas");
  const GridField F = sample_field(GridGeometry::cube(2, 9, 1.0 / 8), 1, true, [](std::span<const double> y) {
    return encode_gas({1.0 + 0.2 * y[0], {0.3 + y[1]}, 0.4});
  });
  const EntropyTransport r = entropy_transport_residual(m, F);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_GT(r.factor_min_abs, 0.0);
}

TEST(Entropy, AdvectedEntropyConvergesAndCounterexampleDoesNot) {
  const LagrangianModel m = make_model("gas", {{"gamma", "2"}});
  const ManufacturedField& adv = manufactured("advected-entropy");
  const double r1 = entropy_transport_residual(m, adv.sample(1.0 / 16)).residual;
  const double r2 = entropy_transport_residual(m, adv.sample(1.0 / 32)).residual;
  EXPECT_GE(observed_order(r1, r2), 1.9);
  EXPECT_LT(closedness_residual(adv.sample(1.0 / 16)), 1e-13);
  const ManufacturedField& bad = manufactured("entropy-counterexample");
  EXPECT_NEAR(entropy_transport_residual(m, bad.sample(1.0 / 16)).residual, 1.0, 1e-12);
}

TEST(Entropy, FactorMatchesPressureDerivative) {
  // For this gas L - m.dL/dm is the pressure e^s rho^2 / 2 (gamma = 2), so the factor is dp/ds.
  const LagrangianModel m = make_model("gas", {{"gamma", "2"}});
  const PFormValue a = encode_gas({1.4, {0.3}, 0.2});
  EXPECT_NEAR(entropy_factor(m, a), std::exp(0.2) * 1.4 * 1.4 / 2.0, 1e-8);
}

TEST(Bernoulli, TrivialAndGradientCases) {
  const ScalarProfile g = ScalarProfile::make([](auto r, auto) { return r * r / 2.0 - r; },
                                              [](double r, double) { return r - 1.0; }, [](double, double) { return 0.0; });
  const GridGeometry G = GridGeometry::cube(3, 9, 1.0 / 8);
  const auto psi0 = ScalarGrid::sample(G, [](auto) { return 0.7; });
  const auto rho1 = ScalarGrid::sample(G, [](auto) { return 1.0; });
  const BernoulliResiduals a = bernoulli_check(g, psi0, rho1);
  EXPECT_EQ(a.curl, 0.0);
  EXPECT_EQ(a.bernoulli, 0.0);
  const auto psi2 = ScalarGrid::sample(G, [](std::span<const double> y) { return y[1] * y[1]; });
  EXPECT_LE(bernoulli_check(g, psi2, rho1).curl, 1e-13);
}

TEST(Bernoulli, ManufacturedPotentialFlow) {
  const ScalarProfile g = polytropic_energy(2.0);  // dg/drho = rho at s = 0
  const GridGeometry G = GridGeometry::cube(3, 9, 1.0 / 8);
  const auto psi = ScalarGrid::sample(G, [](std::span<const double> y) { return -1.5 * y[0] + y[1]; });
  const auto rho = ScalarGrid::sample(G, [](auto) { return 1.0; });
  EXPECT_LT(bernoulli_check(g, psi, rho).bernoulli, 1e-13);

  // Nonlinear psi with rho chosen to satisfy the relation analytically.
  auto psi_fn = [](std::span<const double> y) { return 0.3 * std::sin(y[1] + 2 * y[2]) + 0.2 * y[1] * y[1] - 2.0 * y[0] * (1 + 0.1 * y[2]); };
  auto rho_fn = [](std::span<const double> y) {
    const double c = 0.3 * std::cos(y[1] + 2 * y[2]);
    const double vx = c + 0.4 * y[1], vy = 2 * c - 0.2 * y[0];
    return 2.0 * (1 + 0.1 * y[2]) - 0.5 * (vx * vx + vy * vy);
  };
  double r[2];
  for (int lev = 0; lev < 2; ++lev) {
    const int n = 16 << lev;
    const GridGeometry H = GridGeometry::cube(3, n + 1, 1.0 / n);
    r[lev] = bernoulli_check(g, ScalarGrid::sample(H, psi_fn), ScalarGrid::sample(H, rho_fn)).bernoulli;
  }
  EXPECT_GE(observed_order(r[0], r[1]), 1.9);
  EXPECT_THROW(bernoulli_check(g, ScalarGrid::sample(GridGeometry::cube(3, 4, 0.3), psi_fn),
                               ScalarGrid::sample(GridGeometry::cube(3, 4, 0.3), rho_fn)),
               std::invalid_argument);
}

TEST(Bernoulli, RotationalFlowHasCurl) {
  const GridGeometry G = GridGeometry::cube(3, 9, 1.0 / 8);
  // Not a gradient: sample v-like potential that varies per axis inconsistently.
  const auto psi = ScalarGrid::sample(G, [](std::span<const double> y) { return y[1] * y[2]; });
  EXPECT_LT(bernoulli_check(polytropic_energy(2.0), psi, ScalarGrid::sample(G, [](auto) { return 1.0; })).curl, 1e-13);
}

// ---------------------------------------------------------------------------

TEST(Jump, EqualStatesHaveNoJump) {
  const LagrangianModel m = make_model("maxwell-lorentz");
  std::mt19937_64 rng(12);
  const PFormValue a = m.sample(rng);
  const JumpResiduals r = rankine_hugoniot(m, {{0.5, 0.5, 0.5, 0.5}, a, a});
  EXPECT_EQ(r.max_residual, 0.0);
  EXPECT_THROW(rankine_hugoniot(m, {{1.0, 1.0, 0.0, 0.0}, a, a}), std::invalid_argument);
}

TEST(Jump, GasContactAlongTime) {
  const LagrangianModel m = make_model("gas", {{"gamma", "2"}});
  const JumpResiduals r = rankine_hugoniot(m, {{1.0, 0.0}, encode_gas({1.0, {0.0}, 0.0}), encode_gas({2.0, {0.0}, 0.0})});
  EXPECT_NEAR(r.rows[0], 1.5, 1e-15);  // |[-g]| = |-2 + 1/2|
  EXPECT_EQ(r.rows[1], 0.0);
  EXPECT_NEAR(*r.rho_jump, 1.0, 1e-15);
  EXPECT_NEAR(*r.flux_jump, 1.0, 1e-15);
}

TEST(Jump, LimitCaseNullNormalAdmitsDensityJump) {
  for (double c : {1.0, 2.0}) {
    const LagrangianModel m = make_model("relativistic-limit", {{"c", num(c)}});
    // Null for Lambda^{-1}: nu_0 = c nu_1.
    Vector nu(4);
    nu << c, 1.0, 0.0, 0.0;
    nu.normalize();
    Matrix Lam_inv = Matrix::Identity(4, 4);
    Lam_inv(0, 0) = -1.0 / (c * c);
    const std::vector<double> mL{2.0, 0.3, -0.2, 0.1};
    const Vector delta = 0.2 * Lam_inv * nu;
    std::vector<double> mR(mL);
    for (int k = 0; k < 4; ++k) mR[k] += delta[k];
    const JumpResiduals r = rankine_hugoniot(m, {to_std(nu), encode_nform(mL), encode_nform(mR)});
    EXPECT_LE(r.max_residual, 1e-12);
    EXPECT_LE(std::abs(*r.flux_jump), 1e-14);
    EXPECT_LE(std::abs(*r.nu_lambda_nu), 1e-14);
    EXPECT_GT(std::abs(*r.rho_jump), 1e-2);
  }
}

// ---------------------------------------------------------------------------

TEST(Interpolation, ReproducesCubicsWithDerivatives) {
  const GridGeometry g({6, 7}, {0.2, 0.15}, {-0.3, 0.1});
  auto f = [](double x, double y) { return 1 + x - 2 * y + x * x * y + 0.5 * y * y * y - x * x * x; };
  GridField F(g, 0, false);
  for (std::size_t c = 0; c < F.size(); ++c) {
    const auto y = g.position(c);
    F.raw(c)[0] = f(y[0], y[1]);
  }
  const FieldInterpolant I(F);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ux(-0.3, 0.7), uy(0.1, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> y{ux(rng), uy(rng)};
    EXPECT_NEAR(I(y).coeffs[0], f(y[0], y[1]), 1e-12);
  }
  const VariationField xi = VariationField::sample(GridGeometry::cube(2, 9, 0.125), [](std::span<const double> y) {
    Vector v(2);
    const bool inside = y[0] > 0.2 && y[0] < 0.8 && y[1] > 0.2 && y[1] < 0.8;
    v << (inside ? y[0] * y[1] : 0.0), 0.0;
    return v;
  });
  const VariationInterpolant vi(xi);
  const std::vector<double> p{0.5, 0.45};
  EXPECT_NEAR(vi.value(p)[0], 0.225, 1e-12);
  EXPECT_NEAR(vi.jacobian(p)(0, 0), 0.45, 1e-12);
  EXPECT_NEAR(vi.jacobian(p)(0, 1), 0.5, 1e-12);
  EXPECT_THROW(I(std::vector<double>{5.0, 0.5}), std::out_of_range);
}

TEST(GridIO, BinaryRoundTripIsExactAndLittleEndian) {
  std::mt19937_64 rng(14);
  const auto dir = std::filesystem::temp_directory_path() / "divfree_io_test";
  std::filesystem::create_directories(dir);
  const GridGeometry g({3, 4, 5}, {0.1, 0.2, 0.3}, {0.0, -1.0, 2.0});
  const GridField F = sample_field(g, 2, true, [&](auto) {
    PFormValue a = random_form(rng, 3, 2);
    a.entropy = 0.25;
    return a;
  });
  save_field(F, dir / "f.json");
  const GridField G = load_field(dir / "f.json");
  EXPECT_EQ(G.geometry(), F.geometry());
  EXPECT_EQ(G.data(), F.data());
  EXPECT_TRUE(G.has_entropy());
  std::ifstream raw(dir / "f.f64", std::ios::binary);
  unsigned char b[8];
  raw.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = bits << 8 | b[k];
  double first;
  std::memcpy(&first, &bits, 8);
  EXPECT_EQ(first, F.data()[0]);
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "f.json"));
  EXPECT_EQ(manifest.at("component_order"), nlohmann::json::parse("[[0,1],[0,2],[1,2]]"));
}

TEST(GridIO, CsvWithPermutedComponentOrder) {
  const auto dir = std::filesystem::temp_directory_path() / "divfree_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream m(dir / "c.json");
    m << R"({"d":2,"p":1,"dims":[2,2],"spacing":[1,1],"origin":[0,0],
            "component_order":[[1],[0]],"has_entropy":false,"data_file":"c.csv"})";
    std::ofstream c(dir / "c.csv");
    c << "A1,A0\n1,10\n2,20\n3,30\n4,40\n";
  }
  const GridField F = load_field(dir / "c.json");
  EXPECT_EQ(F.at(2).coeffs, (std::vector<double>{30.0, 3.0}));
  {
    std::ofstream m(dir / "c2.json");
    m << R"({"d":3,"p":2,"dims":[1,1,1],"spacing":[1,1,1],"origin":[0,0,0],
            "component_order":[[1,0],[2,0],[2,1]],"data_file":"c2.csv"})";
    std::ofstream c(dir / "c2.csv");
    c << "a,b,c\n1,2,3\n";
  }
  EXPECT_EQ(load_field(dir / "c2.json").at(0).coeffs, (std::vector<double>{-1.0, -2.0, -3.0}));
}

TEST(GridIO, MalformedInputsRaiseFieldFormatError) {
  const auto dir = std::filesystem::temp_directory_path() / "divfree_io_test";
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  write("short.csv", "h\n1,2\n");
  EXPECT_THROW(load_field(write("m1.json", "{not json")), FieldFormatError);
  EXPECT_THROW(load_field(write("m2.json", R"({"d":2,"p":1})")), FieldFormatError);
  EXPECT_THROW(load_field(write("m3.json", R"({"d":2,"p":1,"dims":[2,2],"spacing":[1,1],"origin":[0,0],"data_file":"short.csv"})")),
               FieldFormatError);
  EXPECT_THROW(load_field(write("m4.json", R"({"d":2,"p":1,"dims":[1,1],"spacing":[1,1],"origin":[0,0],
                                              "component_order":[[0],[0]],"data_file":"short.csv"})")),
               FieldFormatError);
  EXPECT_THROW(load_field(write("m5.json", R"({"d":2,"p":1,"dims":[1,1],"spacing":[-1,1],"origin":[0,0],"data_file":"short.csv"})")),
               FieldFormatError);
  EXPECT_THROW(load_field(dir / "missing.json"), FieldFormatError);
}

TEST(Catalog, StatusFlagsMatchResiduals) {
  for (const ManufacturedField& mf : manufactured_catalog()) {
    const LagrangianModel m = make_model(mf.model, parse_params(mf.model_params));
    const double h = mf.dim == 4 ? 0.25 : 1.0 / 16;
    const GridField F = mf.sample(h);
    if (mf.closed) {
      EXPECT_LT(closedness_residual(F), 0.2) << mf.name;
    }
    const double div = max_of(div_T_residual(m, F));
    if (!mf.divergence_free) {
      EXPECT_GT(div, 0.5) << mf.name;
    }
  }
  EXPECT_THROW(manufactured("nope"), std::invalid_argument);
}
