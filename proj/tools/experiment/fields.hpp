#pragma once

// Typed access to config values with dotted-path diagnostics.

#include <cmath>
#include <limits>
#include <string>

#include "experiment/config.hpp"
#include "teamopt/types.hpp"

namespace teamopt::experiment::fields {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string join(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

inline const Json* find(const Json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline const Json& require(const Json& obj, const std::string& path, const std::string& key) {
  const Json* v = find(obj, key);
  if (v == nullptr) throw ConfigError(join(path, key), "required field is missing");
  return *v;
}

inline void expect_object(const Json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
}

/// Numbers, or the strings "inf" / "-inf".
inline double number(const Json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path, "expected a number");
}

inline double number(const Json& obj, const std::string& path, const std::string& key,
                     double fallback) {
  const Json* v = find(obj, key);
  return v == nullptr ? fallback : number(*v, join(path, key));
}

inline long long integer(const Json& v, const std::string& path) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e15) return static_cast<long long>(d);
  }
  throw ConfigError(path, "expected an integer");
}

inline long long integer(const Json& obj, const std::string& path, const std::string& key,
                         long long fallback) {
  const Json* v = find(obj, key);
  return v == nullptr ? fallback : integer(*v, join(path, key));
}

inline std::string string(const Json& obj, const std::string& path, const std::string& key,
                          const std::string& fallback) {
  const Json* v = find(obj, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

inline Vector vector(const Json& v, const std::string& path) {
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], join(path, i));
  return out;
}

/// Row-major nested arrays; a bare number is a 1x1 matrix.
inline Matrix matrix(const Json& v, const std::string& path) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array()) throw ConfigError(join(path, r), "expected a row array");
    if (r == 0) cols = v[r].size();
    if (v[r].size() != cols || cols == 0) throw ConfigError(join(path, r), "rows have unequal length");
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(v[r][c], join(join(path, r), c));
  return out;
}

}  // namespace teamopt::experiment::fields
