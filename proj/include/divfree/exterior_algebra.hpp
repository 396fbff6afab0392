#pragma once

// Combinatorics of the exterior algebra over R^d: multi-indices with tracked
// parity, the lexicographic coefficient basis, minors, and the pullback of
// p-forms by linear maps.

#include "divfree/linalg.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace divfree {

inline constexpr int kMaxDim = 8;

/// Ordered tuple of 0-based axis indices.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> e) : entries(e) {}
  explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {}

  int degree() const { return static_cast<int>(entries.size()); }
  bool is_canonical() const {
    return std::adjacent_find(entries.begin(), entries.end(),
                              [](int a, int b) { return a >= b; }) == entries.end();
  }
  std::uint32_t mask() const {
    std::uint32_t m = 0;
    for (int e : entries) m |= 1u << e;
    return m;
  }
  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < entries.size(); ++k) os << (k ? "," : "") << entries[k];
    os << ')';
    return os.str();
  }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// Sorted tuple together with the signature of the sorting permutation.
/// parity == 0 flags a repeated index (the wedge vanishes).
struct Canonical {
  MultiIndex index;
  int parity = 1;
};

inline Canonical canonicalize(std::span<const int> raw, int d) {
  for (int e : raw) {
    if (e < 0 || e >= d) {
      throw std::out_of_range("canonicalize: index " + std::to_string(e) +
                              " outside [0," + std::to_string(d) + ")");
    }
  }
  int inversions = 0;
  for (std::size_t a = 0; a < raw.size(); ++a) {
    for (std::size_t b = a + 1; b < raw.size(); ++b) {
      if (raw[a] > raw[b]) ++inversions;
    }
  }
  std::vector<int> sorted(raw.begin(), raw.end());
  std::sort(sorted.begin(), sorted.end());
  const bool repeated = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
  return {MultiIndex(std::move(sorted)), repeated ? 0 : (inversions % 2 ? -1 : 1)};
}

inline Canonical canonicalize(std::initializer_list<int> raw, int d) {
  return canonicalize(std::span<const int>(raw.begin(), raw.size()), d);
}

/// (-1)^q where q counts the entries of K strictly between i and j.
inline int between_sign(int i, int j, const MultiIndex& K) {
  if (i == j) throw std::invalid_argument("between_sign: i == j");
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  int q = 0;
  for (int k : K.entries) {
    if (k == i || k == j) throw std::invalid_argument("between_sign: i or j lies in K");
    if (lo < k && k < hi) ++q;
  }
  return q % 2 ? -1 : 1;
}

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

/// All canonical p-subsets of {0..d-1} in lexicographic order.
inline std::vector<MultiIndex> enumerate_subsets(int d, int p) {
  if (p < 0 || p > d) throw std::invalid_argument("enumerate_subsets: need 0 <= p <= d");
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) cur[k] = k;
  while (true) {
    out.emplace_back(cur);
    int k = p - 1;
    while (k >= 0 && cur[k] == d - p + k) --k;
    if (k < 0) break;
    ++cur[k];
    for (int t = k + 1; t < p; ++t) cur[t] = cur[t - 1] + 1;
  }
  return out;
}

/// Storage basis of Lambda^p(R^d): subsets plus a bitmask -> position table.
class FormBasis {
 public:
  FormBasis(int d, int p) : d_(d), p_(p), subsets_(enumerate_subsets(d, p)) {
    if (d > kMaxDim) throw std::invalid_argument("FormBasis: dimension above kMaxDim");
    position_.assign(std::size_t{1} << d, -1);
    for (std::size_t k = 0; k < subsets_.size(); ++k) position_[subsets_[k].mask()] = static_cast<int>(k);
    if (p >= 1) lower_ = enumerate_subsets(d, p - 1);
  }

  int dim() const { return d_; }
  int degree() const { return p_; }
  int size() const { return static_cast<int>(subsets_.size()); }
  const std::vector<MultiIndex>& subsets() const { return subsets_; }
  const MultiIndex& operator[](int k) const { return subsets_[static_cast<std::size_t>(k)]; }
  /// Canonical (p-1)-subsets, the K of the tensor and Lie-action sums.
  const std::vector<MultiIndex>& lower() const { return lower_; }

  int position(std::uint32_t mask) const { return position_[mask]; }
  int position(const MultiIndex& canonical) const { return position_[canonical.mask()]; }

  /// Storage slot and sign of the concatenation (i, K...), K canonical and i not in K.
  std::pair<int, int> slot_of_prefixed(int i, const MultiIndex& K) const {
    int sign = 1;
    for (int k : K.entries) {
      if (k < i) sign = -sign;
    }
    return {position_[K.mask() | (1u << i)], sign};
  }

 private:
  int d_;
  int p_;
  std::vector<MultiIndex> subsets_;
  std::vector<MultiIndex> lower_;
  std::vector<int> position_;
};

/// Shared basis instance for (d, p); d <= kMaxDim.
inline const FormBasis& form_basis(int d, int p) {
  static const auto table = [] {
    std::vector<std::vector<FormBasis>> t;
    for (int dd = 0; dd <= kMaxDim; ++dd) {
      t.emplace_back();
      for (int pp = 0; pp <= dd; ++pp) t.back().emplace_back(dd, pp);
    }
    return t;
  }();
  if (d < 0 || d > kMaxDim || p < 0 || p > d) {
    throw std::invalid_argument("form_basis: unsupported (d,p) = (" + std::to_string(d) + "," +
                                std::to_string(p) + ")");
  }
  return table[static_cast<std::size_t>(d)][static_cast<std::size_t>(p)];
}

/// Pointwise value of a p-form: dense coefficients in lexicographic order plus
/// an optional entropy scalar.
struct PFormValue {
  int degree = 0;
  int dim = 0;
  std::vector<double> coeffs;
  std::optional<double> entropy;

  PFormValue() = default;
  PFormValue(int d, int p) : degree(p), dim(d), coeffs(static_cast<std::size_t>(binomial(d, p)), 0.0) {}
  PFormValue(int d, int p, std::vector<double> c, std::optional<double> s = std::nullopt)
      : degree(p), dim(d), coeffs(std::move(c)), entropy(s) {
    if (static_cast<long>(coeffs.size()) != binomial(d, p)) {
      throw std::invalid_argument("PFormValue: expected C(d,p) coefficients");
    }
  }

  const FormBasis& basis() const { return form_basis(dim, degree); }
  double entropy_or_zero() const { return entropy.value_or(0.0); }

  /// A_H for an arbitrary tuple H: parity times the canonical coefficient.
  double coeff(std::span<const int> raw) const {
    if (static_cast<int>(raw.size()) != degree) throw std::invalid_argument("PFormValue::coeff: wrong degree");
    const Canonical c = canonicalize(raw, dim);
    if (c.parity == 0) return 0.0;
    return c.parity * coeffs[static_cast<std::size_t>(basis().position(c.index))];
  }
  double coeff(std::initializer_list<int> raw) const {
    return coeff(std::span<const int>(raw.begin(), raw.size()));
  }
  /// Stores v as A_H, i.e. writes parity * v into the canonical slot.
  void set(std::span<const int> raw, double v) {
    const Canonical c = canonicalize(raw, dim);
    if (c.parity == 0) throw std::invalid_argument("PFormValue::set: repeated index");
    coeffs[static_cast<std::size_t>(basis().position(c.index))] = c.parity * v;
  }
  void set(std::initializer_list<int> raw, double v) { set(std::span<const int>(raw.begin(), raw.size()), v); }
};

namespace detail {

inline double det_small(const Matrix& a) {
  switch (a.rows()) {
    case 0:
      return 1.0;
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    case 4: {
      double r = 0.0;
      for (int c = 0; c < 4; ++c) {
        Matrix sub(3, 3);
        for (int i = 1; i < 4; ++i) {
          for (int j = 0, jj = 0; j < 4; ++j) {
            if (j != c) sub(i - 1, jj++) = a(i, j);
          }
        }
        r += (c % 2 ? -1.0 : 1.0) * a(0, c) * det_small(sub);
      }
      return r;
    }
    default:
      return a.partialPivLu().determinant();
  }
}

}  // namespace detail

/// det M(I,J): rows I, columns J.
inline double minor(const Matrix& M, const MultiIndex& I, const MultiIndex& J) {
  if (I.degree() != J.degree()) throw std::invalid_argument("minor: |I| != |J|");
  const int k = I.degree();
  Matrix sub(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) sub(a, b) = M(I.entries[a], J.entries[b]);
  }
  return detail::det_small(sub);
}

/// p-th compound matrix: entry (I,J) = M(I,J) over the storage basis.
inline Matrix compound_matrix(const Matrix& M, int p) {
  const FormBasis& B = form_basis(static_cast<int>(M.rows()), p);
  Matrix C(B.size(), B.size());
  for (int a = 0; a < B.size(); ++a) {
    for (int b = 0; b < B.size(); ++b) C(a, b) = minor(M, B[a], B[b]);
  }
  return C;
}

/// M^* alpha with M^* dy_I = sum_J M(I,J) dy_J. Composition: (M1 M2)^* = M2^* o M1^*.
inline PFormValue pullback(const Matrix& M, const PFormValue& alpha) {
  if (M.rows() != alpha.dim || M.cols() != alpha.dim) throw std::invalid_argument("pullback: shape mismatch");
  const Matrix C = compound_matrix(M, alpha.degree);
  PFormValue out(alpha.dim, alpha.degree);
  out.entropy = alpha.entropy;
  for (int b = 0; b < C.cols(); ++b) {
    double acc = 0.0;
    for (int a = 0; a < C.rows(); ++a) acc += alpha.coeffs[a] * C(a, b);
    out.coeffs[b] = acc;
  }
  return out;
}

/// d/dt|_0 (e^{tN})^* alpha = sum_K sum_{i,j notin K} n_ij A_{iK} dy_{jK}.
inline PFormValue infinitesimal_pullback(const Matrix& N, const PFormValue& alpha) {
  if (N.rows() != alpha.dim || N.cols() != alpha.dim) {
    throw std::invalid_argument("infinitesimal_pullback: shape mismatch");
  }
  PFormValue out(alpha.dim, alpha.degree);
  out.entropy = alpha.entropy;
  if (alpha.degree == 0) return out;
  const FormBasis& B = alpha.basis();
  const int d = alpha.dim;
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
        out.coeffs[sj] += sgn_j * N(i, j) * a_iK;
      }
    }
  }
  return out;
}

/// Pfaffian of a 2-form on R^4, taken in the orientation with the time axis 0
/// last, (y1, y2, y3, y0). Under the electromagnetic identification this is E.B.
inline double pfaffian_2form(const PFormValue& alpha) {
  if (alpha.degree != 2 || alpha.dim != 4) throw std::invalid_argument("pfaffian_2form: need p=2, d=4");
  const auto a = [&](int i, int j) { return alpha.coeff({i, j}); };
  const double canonical = a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  // (1,2,3,0) is an odd permutation of (0,1,2,3).
  return -canonical;
}

}  // namespace divfree
