#pragma once

// Catalog of manufactured fields with known residual status. Axis 0 is time.

#include "divfree/grid_field.hpp"
#include "divfree/models.hpp"

#include <cmath>
#include <numbers>

namespace divfree {

struct ManufacturedField {
  std::string name;
  std::string description;
  std::string model;  // registry name the status refers to
  std::string model_params;
  int dim = 0;
  int degree = 0;
  bool has_entropy = false;
  bool closed = true;           // d alpha = 0 analytically
  bool divergence_free = true;  // Div T = 0 analytically for `model`
  std::function<PFormValue(std::span<const double>)> form;

  /// Samples on [0, 1]^d with spacing h (h must divide 1).
  GridGeometry geometry(double h) const {
    const int n = static_cast<int>(std::lround(1.0 / h)) + 1;
    return GridGeometry::cube(dim, n, h);
  }
  GridField sample(double h) const { return sample_field(geometry(h), degree, has_entropy, form); }
};

namespace detail {

/// Linear vacuum plane wave along unit k with polarisation e (e . k = 0),
/// phase w (k.x - t): E = e cos, B = (k x e) cos.
inline PFormValue plane_wave(std::span<const double> y, const Vec3& k, const Vec3& e, double w) {
  const double phase = w * (k[0] * y[1] + k[1] * y[2] + k[2] * y[3] - y[0]);
  const double c = std::cos(phase);
  const Vec3 b = cross(k, e);
  EMState st;
  for (int a = 0; a < 3; ++a) {
    st.E[a] = e[a] * c;
    st.B[a] = b[a] * c;
  }
  PFormValue out = encode_em(st);
  out.entropy.reset();
  return out;
}

}  // namespace detail

inline const std::vector<ManufacturedField>& manufactured_catalog() {
  static const std::vector<ManufacturedField> list = [] {
    std::vector<ManufacturedField> v;
    {
      const Vec3 k{1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0};
      const double s5 = std::sqrt(5.0);
      const Vec3 e{2.0 / s5, -1.0 / s5, 0.0};
      v.push_back({"maxwell-plane-wave", "oblique vacuum plane wave, k = (1,2,2)/3, phase 2(k.x - t)",
                   "maxwell-linear", "", 4, 2, false, true, true,
                   [k, e](std::span<const double> y) { return detail::plane_wave(y, k, e, 2.0); }});
      v.push_back({"maxwell-plane-wave-x1", "E = (0, cos(x1 - t), 0), B = (0, 0, cos(x1 - t))", "maxwell-linear", "",
                   4, 2, false, true, true, [](std::span<const double> y) {
                     return detail::plane_wave(y, Vec3{1, 0, 0}, Vec3{0, 1, 0}, 1.0);
                   }});
    }
    v.push_back({"gas-uniform", "uniform gas state rho = 1.3, q = (0.4, -0.2, 0.1), s = 0.2", "gas", "n=3", 4, 3,
                 true, true, true, [](std::span<const double>) {
                   return encode_gas(GasState{1.3, {0.4, -0.2, 0.1}, 0.2});
                 }});
    v.push_back({"relativistic-uniform", "uniform relativistic state m = (1.5, 0.3, -0.2, 0.4), s = 0.1",
                 "relativistic", "", 4, 3, true, true, true, [](std::span<const double>) {
                   const std::vector<double> m{1.5, 0.3, -0.2, 0.4};
                   return encode_nform(m, 0.1);
                 }});
    v.push_back({"gas-static-nonuniform", "rho = 1 + x^2, q = 0: closed but not a solution (pressure gradient)",
                 "gas", "n=1,gamma=2", 2, 1, true, true, false, [](std::span<const double> y) {
                   return encode_gas(GasState{1.0 + y[1] * y[1], {0.0}, 0.0});
                 }});
    v.push_back({"advected-entropy", "m = (1.2, 0.6) uniform, s = sin(2 pi (x - 0.5 t))", "gas", "n=1,gamma=2", 2, 1,
                 true, true, false, [](std::span<const double> y) {
                   const double s = std::sin(2.0 * std::numbers::pi * (y[1] - 0.5 * y[0]));
                   return encode_gas(GasState{1.2, {0.6}, s});
                 }});
    v.push_back({"entropy-counterexample", "m = (1, 1), s = x: m . grad s = 1", "gas", "n=1,gamma=2", 2, 1, true,
                 true, false, [](std::span<const double> y) { return encode_gas(GasState{1.0, {1.0}, y[1]}); }});
    return v;
  }();
  return list;
}

inline const ManufacturedField& manufactured(const std::string& name) {
  for (const auto& m : manufactured_catalog()) {
    if (m.name == name) return m;
  }
  throw std::invalid_argument("unknown manufactured field '" + name + "'");
}

}  // namespace divfree
