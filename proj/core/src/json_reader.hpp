#pragma once

// Strict reader for declarative config objects: every key must be consumed and
// errors carry "<source>: <json-pointer>: message".

#include <json.hpp>

#include <optional>
#include <set>
#include <string>

#include "specmon/error.hpp"

namespace specmon::detail {

class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string source, std::string pointer = "")
      : j_(j), source_(std::move(source)), pointer_(std::move(pointer)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(source_, key.empty() ? pointer_ : pointer_ + "/" + key, message);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(key, "missing required key");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const auto& v = raw(key);
    return convert<T>(v, key);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(j_.at(key), key);
  }

  template <typename T>
  std::optional<T> get_optional(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    return convert<T>(j_.at(key), key);
  }

  ObjectReader child(const std::string& key) { return ObjectReader(raw(key), source_, pointer_ + "/" + key); }

  std::string path(const std::string& key) const { return pointer_ + "/" + key; }
  const std::string& source() const { return source_; }

  /// Rejects any key not read so far.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key '" + it.key() + "'");
    }
  }

 private:
  template <typename T>
  T convert(const nlohmann::json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(key, "expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())))) {
          fail(key, "expected an integer");
        }
        if (v.is_number_float()) return static_cast<T>(v.get<double>());
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(key, "expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(key, "expected a string");
      }
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(key, e.what());
    }
  }

  const nlohmann::json& j_;
  std::string source_;
  std::string pointer_;
  std::set<std::string> seen_;
};

inline nlohmann::json parse_json_text(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source, "", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace specmon::detail
