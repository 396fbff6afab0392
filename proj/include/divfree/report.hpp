#pragma once

// Deterministic report text: keys in sorted order, floats with 17 significant
// digits, so identical inputs give byte-identical output.

#include <json.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace divfree {

enum class OutputFormat { Json, Csv, Pretty };

namespace detail {

inline std::string format_double(double x, int digits = 17) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline void emit_json(const nlohmann::json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + ": ";
        emit_json(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      if (scalars) {
        out += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit_json(j[k], out, indent + 2);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        emit_json(j[k], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

inline void flatten(const nlohmann::json& j, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& out, int digits) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out, digits);
    }
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "." + std::to_string(k), out, digits);
  } else if (j.is_number_float()) {
    out.emplace_back(prefix, format_double(j.get<double>(), digits));
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

inline std::string report_serialize(const nlohmann::json& report, OutputFormat fmt = OutputFormat::Json) {
  std::string out;
  switch (fmt) {
    case OutputFormat::Json:
      detail::emit_json(report, out, 0);
      out += "\n";
      break;
    case OutputFormat::Csv: {
      std::vector<std::pair<std::string, std::string>> flat;
      detail::flatten(report, "", flat, 17);
      std::string header, row;
      for (std::size_t k = 0; k < flat.size(); ++k) {
        header += (k ? "," : "") + detail::csv_cell(flat[k].first);
        row += (k ? "," : "") + detail::csv_cell(flat[k].second);
      }
      out = header + "\n" + row + "\n";
      break;
    }
    case OutputFormat::Pretty: {
      std::vector<std::pair<std::string, std::string>> flat;
      detail::flatten(report, "", flat, 8);
      std::size_t w = 0;
      for (const auto& [k, v] : flat) w = std::max(w, k.size());
      for (const auto& [k, v] : flat) out += k + std::string(w - k.size() + 2, ' ') + v + "\n";
      break;
    }
  }
  return out;
}

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace divfree
