#pragma once

// Uniform rectangular sample grids of p-forms, scalars and vector fields, and
// the on-disk field format: a JSON manifest plus a flat little-endian float64
// array (cells x components, row-major, last axis fastest) or a CSV table.

#include "divfree/exterior_algebra.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace divfree {

class FieldFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridGeometry {
  std::vector<int> dims;  // samples per axis
  std::vector<double> spacing;
  std::vector<double> origin;

  GridGeometry() = default;
  GridGeometry(std::vector<int> n, std::vector<double> h, std::vector<double> o)
      : dims(std::move(n)), spacing(std::move(h)), origin(std::move(o)) {
    validate();
  }

  /// n samples per axis with spacing h on [origin, origin + (n-1) h]^d.
  static GridGeometry cube(int d, int n, double h, double origin = 0.0) {
    return GridGeometry(std::vector<int>(static_cast<std::size_t>(d), n), std::vector<double>(static_cast<std::size_t>(d), h),
                        std::vector<double>(static_cast<std::size_t>(d), origin));
  }

  void validate() const {
    if (dims.empty() || dims.size() != spacing.size() || dims.size() != origin.size()) {
      throw std::invalid_argument("GridGeometry: dims, spacing and origin must have equal nonzero length");
    }
    for (int n : dims) {
      if (n < 1) throw std::invalid_argument("GridGeometry: dims must be positive");
    }
    for (double h : spacing) {
      if (!(h > 0.0)) throw std::invalid_argument("GridGeometry: spacing must be positive");
    }
  }

  int dim() const { return static_cast<int>(dims.size()); }
  std::size_t count() const {
    std::size_t c = 1;
    for (int n : dims) c *= static_cast<std::size_t>(n);
    return c;
  }
  double cell_volume() const {
    double v = 1.0;
    for (double h : spacing) v *= h;
    return v;
  }
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = dim() - 1; a > axis; --a) s *= static_cast<std::size_t>(dims[a]);
    return s;
  }
  std::vector<int> unravel(std::size_t flat) const {
    std::vector<int> idx(dims.size());
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % static_cast<std::size_t>(dims[a]));
      flat /= static_cast<std::size_t>(dims[a]);
    }
    return idx;
  }
  std::size_t ravel(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim(); ++a) f = f * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(idx[a]);
    return f;
  }
  std::vector<double> position(std::span<const int> idx) const {
    std::vector<double> y(dims.size());
    for (int a = 0; a < dim(); ++a) y[a] = origin[a] + spacing[a] * idx[a];
    return y;
  }
  std::vector<double> position(std::size_t flat) const { return position(unravel(flat)); }
  /// At least `margin` samples away from every face.
  bool interior(std::span<const int> idx, int margin = 1) const {
    for (int a = 0; a < dim(); ++a) {
      if (idx[a] < margin || idx[a] >= dims[a] - margin) return false;
    }
    return true;
  }
  void require_min_samples(int n, const char* who) const {
    for (int m : dims) {
      if (m < n) throw std::invalid_argument(std::string(who) + ": grid too small, need >= " + std::to_string(n) +
                                             " samples per axis");
    }
  }
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Samples of a p-form (and optionally the entropy) on a grid.
class GridField {
 public:
  GridField(GridGeometry g, int p, bool has_entropy)
      : geom_(std::move(g)), p_(p), has_entropy_(has_entropy) {
    geom_.validate();
    form_basis(geom_.dim(), p_);
    data_.assign(geom_.count() * static_cast<std::size_t>(components()), 0.0);
  }

  const GridGeometry& geometry() const { return geom_; }
  int dim() const { return geom_.dim(); }
  int degree() const { return p_; }
  bool has_entropy() const { return has_entropy_; }
  int coefficient_count() const { return form_basis(dim(), p_).size(); }
  int components() const { return coefficient_count() + (has_entropy_ ? 1 : 0); }
  std::size_t size() const { return geom_.count(); }

  std::span<const double> raw(std::size_t cell) const {
    return {data_.data() + cell * static_cast<std::size_t>(components()), static_cast<std::size_t>(components())};
  }
  std::span<double> raw(std::size_t cell) {
    return {data_.data() + cell * static_cast<std::size_t>(components()), static_cast<std::size_t>(components())};
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  PFormValue at(std::size_t cell) const {
    const auto r = raw(cell);
    const int C = coefficient_count();
    PFormValue a(dim(), p_, std::vector<double>(r.begin(), r.begin() + C));
    if (has_entropy_) a.entropy = r[static_cast<std::size_t>(C)];
    return a;
  }
  void set(std::size_t cell, const PFormValue& a) {
    if (a.dim != dim() || a.degree != p_) throw std::invalid_argument("GridField::set: form shape mismatch");
    auto r = raw(cell);
    std::copy(a.coeffs.begin(), a.coeffs.end(), r.begin());
    if (has_entropy_) r[static_cast<std::size_t>(coefficient_count())] = a.entropy_or_zero();
  }

 private:
  GridGeometry geom_;
  int p_;
  bool has_entropy_;
  std::vector<double> data_;
};

/// Fills a field from fn(position) -> PFormValue.
inline GridField sample_field(const GridGeometry& g, int p, bool has_entropy,
                              const std::function<PFormValue(std::span<const double>)>& fn) {
  GridField f(g, p, has_entropy);
  for (std::size_t c = 0; c < f.size(); ++c) f.set(c, fn(g.position(c)));
  return f;
}

struct ScalarGrid {
  GridGeometry geom;
  std::vector<double> values;

  static ScalarGrid sample(const GridGeometry& g, const std::function<double(std::span<const double>)>& fn) {
    ScalarGrid s{g, std::vector<double>(g.count())};
    for (std::size_t c = 0; c < g.count(); ++c) s.values[c] = fn(g.position(c));
    return s;
  }
};

/// Compactly supported test vector field: zero on a boundary margin of at
/// least kMargin samples.
class VariationField {
 public:
  static constexpr int kMargin = 2;

  VariationField(GridGeometry g, std::vector<double> values) : geom_(std::move(g)), values_(std::move(values)) {
    if (values_.size() != geom_.count() * static_cast<std::size_t>(geom_.dim())) {
      throw std::invalid_argument("VariationField: expected d components per sample");
    }
    for (std::size_t c = 0; c < geom_.count(); ++c) {
      if (geom_.interior(geom_.unravel(c), kMargin)) continue;
      for (double x : at(c)) {
        if (x != 0.0) throw std::invalid_argument("VariationField: nonzero within the boundary margin");
      }
    }
  }

  static VariationField sample(const GridGeometry& g, const std::function<Vector(std::span<const double>)>& fn) {
    std::vector<double> v;
    v.reserve(g.count() * static_cast<std::size_t>(g.dim()));
    for (std::size_t c = 0; c < g.count(); ++c) {
      const Vector x = fn(g.position(c));
      v.insert(v.end(), x.data(), x.data() + x.size());
    }
    return VariationField(g, std::move(v));
  }

  const GridGeometry& geometry() const { return geom_; }
  std::span<const double> at(std::size_t cell) const {
    return {values_.data() + cell * static_cast<std::size_t>(geom_.dim()), static_cast<std::size_t>(geom_.dim())};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  GridGeometry geom_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// File format

namespace detail {

inline void write_le_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char b[8];
  std::memcpy(b, &bits, 8);
  os.write(b, 8);
}

inline double read_le_f64(const char* b) {
  std::uint64_t bits;
  std::memcpy(&bits, b, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

inline std::filesystem::path default_data_path(const std::filesystem::path& manifest) {
  std::filesystem::path p = manifest;
  p.replace_extension(".f64");
  return p;
}

}  // namespace detail

/// Manifest JSON for a field; data_file is stored relative to the manifest.
inline nlohmann::json field_manifest(const GridField& f, const std::string& data_file) {
  nlohmann::json j;
  j["d"] = f.dim();
  j["p"] = f.degree();
  j["dims"] = f.geometry().dims;
  j["spacing"] = f.geometry().spacing;
  j["origin"] = f.geometry().origin;
  nlohmann::json order = nlohmann::json::array();
  for (const auto& J : form_basis(f.dim(), f.degree()).subsets()) order.push_back(J.entries);
  j["component_order"] = order;
  j["has_entropy"] = f.has_entropy();
  j["data_file"] = data_file;
  return j;
}

inline void save_field(const GridField& f, const std::filesystem::path& manifest_path) {
  const auto data_path = detail::default_data_path(manifest_path);
  {
    std::ofstream m(manifest_path);
    if (!m) throw FieldFormatError("cannot write " + manifest_path.string());
    m << field_manifest(f, data_path.filename().string()).dump(2) << '\n';
  }
  std::ofstream d(data_path, std::ios::binary);
  if (!d) throw FieldFormatError("cannot write " + data_path.string());
  for (double x : f.data()) detail::write_le_f64(d, x);
}

namespace detail {

/// Maps file component k to (storage slot, sign); any tuple order is accepted.
inline std::vector<std::pair<int, int>> component_map(const nlohmann::json& order, int d, int p) {
  const FormBasis& B = form_basis(d, p);
  if (!order.is_array() || static_cast<int>(order.size()) != B.size()) {
    throw FieldFormatError("component_order must list C(d,p) index tuples");
  }
  std::vector<std::pair<int, int>> map;
  std::vector<bool> seen(static_cast<std::size_t>(B.size()), false);
  for (const auto& t : order) {
    const auto raw = t.get<std::vector<int>>();
    if (static_cast<int>(raw.size()) != p) throw FieldFormatError("component_order entry has the wrong degree");
    Canonical c;
    try {
      c = canonicalize(raw, d);
    } catch (const std::out_of_range& e) {
      throw FieldFormatError(e.what());
    }
    if (c.parity == 0) throw FieldFormatError("component_order entry repeats an index");
    const int slot = B.position(c.index);
    if (seen[static_cast<std::size_t>(slot)]) throw FieldFormatError("component_order lists a subset twice");
    seen[static_cast<std::size_t>(slot)] = true;
    map.emplace_back(slot, c.parity);
  }
  return map;
}

inline std::vector<double> read_csv_table(const std::filesystem::path& path, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw FieldFormatError("cannot read " + path.string());
  std::string line;
  std::vector<double> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        out.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FieldFormatError("bad CSV number '" + cell + "' in " + path.string());
      }
      ++n;
    }
    if (n != cols) throw FieldFormatError("CSV row has " + std::to_string(n) + " columns, expected " + std::to_string(cols));
  }
  return out;
}

}  // namespace detail

/// Loads a manifest and its companion data (.f64 binary or .csv with a header row).
inline GridField load_field(const std::filesystem::path& manifest_path) {
  std::ifstream m(manifest_path);
  if (!m) throw FieldFormatError("cannot read " + manifest_path.string());
  nlohmann::json j;
  try {
    m >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FieldFormatError("malformed manifest: " + std::string(e.what()));
  }
  try {
    const int d = j.at("d").get<int>();
    const int p = j.at("p").get<int>();
    GridGeometry g(j.at("dims").get<std::vector<int>>(), j.at("spacing").get<std::vector<double>>(),
                   j.at("origin").get<std::vector<double>>());
    if (g.dim() != d) throw FieldFormatError("manifest: dims length != d");
    if (p < 0 || p > d) throw FieldFormatError("manifest: p out of range");
    const bool has_s = j.value("has_entropy", false);
    const auto map = j.contains("component_order")
                         ? detail::component_map(j.at("component_order"), d, p)
                         : [&] {
                             std::vector<std::pair<int, int>> id;
                             for (int k = 0; k < form_basis(d, p).size(); ++k) id.emplace_back(k, 1);
                             return id;
                           }();
    GridField f(g, p, has_s);
    const std::size_t comps = static_cast<std::size_t>(f.components());
    std::filesystem::path data_path = j.contains("data_file")
                                          ? manifest_path.parent_path() / j.at("data_file").get<std::string>()
                                          : detail::default_data_path(manifest_path);
    std::vector<double> flat;
    if (data_path.extension() == ".csv") {
      flat = detail::read_csv_table(data_path, comps);
    } else {
      std::ifstream in(data_path, std::ios::binary);
      if (!in) throw FieldFormatError("cannot read " + data_path.string());
      std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (bytes.size() % 8) throw FieldFormatError("data file size is not a multiple of 8 bytes");
      flat.resize(bytes.size() / 8);
      for (std::size_t k = 0; k < flat.size(); ++k) flat[k] = detail::read_le_f64(bytes.data() + 8 * k);
    }
    if (flat.size() != f.size() * comps) {
      throw FieldFormatError("data holds " + std::to_string(flat.size()) + " values, expected " +
                             std::to_string(f.size() * comps));
    }
    for (std::size_t c = 0; c < f.size(); ++c) {
      auto r = f.raw(c);
      for (std::size_t k = 0; k < map.size(); ++k) {
        r[static_cast<std::size_t>(map[k].first)] = map[k].second * flat[c * comps + k];
      }
      if (has_s) r[comps - 1] = flat[c * comps + comps - 1];
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FieldFormatError("malformed manifest: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw FieldFormatError(std::string("invalid manifest: ") + e.what());
  }
}

}  // namespace divfree
