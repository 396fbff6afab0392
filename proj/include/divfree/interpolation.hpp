#pragma once

// Tensor-product 4-point Lagrange interpolation of gridded samples, used to
// evaluate fields along flow lines between grid nodes.

#include "divfree/grid_field.hpp"

#include <array>
#include <cmath>

namespace divfree {

namespace detail {

struct AxisStencil {
  int start = 0;
  std::array<double, 4> w{};
  std::array<double, 4> dw{};  // d/dy, already divided by h
};

inline AxisStencil axis_stencil(double y, double origin, double h, int n) {
  if (n < 4) throw std::invalid_argument("cubic interpolation needs >= 4 samples per axis");
  const double x = (y - origin) / h;
  if (x < -1e-12 || x > (n - 1) + 1e-12) throw std::out_of_range("interpolation point outside the grid");
  int start = static_cast<int>(std::floor(x)) - 1;
  start = std::clamp(start, 0, n - 4);
  const double t = x - start;
  AxisStencil s;
  s.start = start;
  for (int k = 0; k < 4; ++k) {
    double num = 1.0, den = 1.0, dsum = 0.0;
    for (int m = 0; m < 4; ++m) {
      if (m == k) continue;
      num *= t - m;
      den *= k - m;
    }
    // derivative of prod_{m != k} (t - m)
    for (int m = 0; m < 4; ++m) {
      if (m == k) continue;
      double prod = 1.0;
      for (int r = 0; r < 4; ++r) {
        if (r != k && r != m) prod *= t - r;
      }
      dsum += prod;
    }
    s.w[k] = num / den;
    s.dw[k] = dsum / den / h;
  }
  return s;
}

/// Interpolates `comps` interleaved components; fills value and, if grad is
/// non-null, grad[c * d + axis].
inline void interpolate(const GridGeometry& g, const double* data, int comps, std::span<const double> y,
                        double* value, double* grad) {
  const int d = g.dim();
  std::array<AxisStencil, kMaxDim> st;
  for (int a = 0; a < d; ++a) st[a] = axis_stencil(y[a], g.origin[a], g.spacing[a], g.dims[a]);
  std::fill(value, value + comps, 0.0);
  if (grad) std::fill(grad, grad + comps * d, 0.0);
  std::array<int, kMaxDim> k{};
  std::array<int, kMaxDim> idx{};
  const int total = 1 << (2 * d);
  for (int lin = 0; lin < total; ++lin) {
    int rem = lin;
    double w = 1.0;
    for (int a = d - 1; a >= 0; --a) {
      k[a] = rem & 3;
      rem >>= 2;
      idx[a] = st[a].start + k[a];
      w *= st[a].w[k[a]];
    }
    const double* src = data + g.ravel(std::span<const int>(idx.data(), static_cast<std::size_t>(d))) * comps;
    for (int c = 0; c < comps; ++c) value[c] += w * src[c];
    if (grad) {
      for (int a = 0; a < d; ++a) {
        double wa = st[a].dw[k[a]];
        for (int b = 0; b < d; ++b) {
          if (b != a) wa *= st[b].w[k[b]];
        }
        for (int c = 0; c < comps; ++c) grad[c * d + a] += wa * src[c];
      }
    }
  }
}

}  // namespace detail

/// Form source over a GridField: value at arbitrary points of the box.
class FieldInterpolant {
 public:
  explicit FieldInterpolant(const GridField& f) : f_(&f) {}

  PFormValue operator()(std::span<const double> y) const {
    std::vector<double> v(static_cast<std::size_t>(f_->components()));
    detail::interpolate(f_->geometry(), f_->data().data(), f_->components(), y, v.data(), nullptr);
    const int C = f_->coefficient_count();
    PFormValue a(f_->dim(), f_->degree(), std::vector<double>(v.begin(), v.begin() + C));
    if (f_->has_entropy()) a.entropy = v[static_cast<std::size_t>(C)];
    return a;
  }

 private:
  const GridField* f_;
};

/// Vector source over a VariationField: value and Jacobian J_ij = d_j xi_i.
class VariationInterpolant {
 public:
  explicit VariationInterpolant(const VariationField& xi) : xi_(&xi) {}

  Vector value(std::span<const double> y) const {
    const int d = xi_->geometry().dim();
    Vector v(d);
    detail::interpolate(xi_->geometry(), xi_->values().data(), d, y, v.data(), nullptr);
    return v;
  }
  Matrix jacobian(std::span<const double> y) const {
    const int d = xi_->geometry().dim();
    Vector v(d);
    std::vector<double> g(static_cast<std::size_t>(d * d));
    detail::interpolate(xi_->geometry(), xi_->values().data(), d, y, v.data(), g.data());
    Matrix J(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) J(i, j) = g[static_cast<std::size_t>(i * d + j)];
    }
    return J;
  }

 private:
  const VariationField* xi_;
};

}  // namespace divfree
