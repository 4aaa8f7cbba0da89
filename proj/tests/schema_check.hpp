// Minimal JSON-schema subset validator for the report schema: object/array
// nesting, "type" (including union types and null), "required", "properties",
// "items". Enough to re-validate emitted reports against the published file.
#pragma once

#include <string>

#include "json.hpp"

namespace schema_check {

inline bool type_matches(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

inline bool validate(const nlohmann::json& value, const nlohmann::json& schema,
                     std::string* error = nullptr, const std::string& where = "$") {
  auto fail = [&](const std::string& msg) {
    if (error) *error = where + ": " + msg;
    return false;
  };

  if (schema.contains("type")) {
    const auto& type = schema["type"];
    bool ok = false;
    if (type.is_string()) {
      ok = type_matches(value, type.get<std::string>());
    } else {
      for (const auto& t : type) ok = ok || type_matches(value, t.get<std::string>());
    }
    if (!ok) return fail("type mismatch (got " + std::string(value.type_name()) + ")");
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!value.contains(key.get<std::string>())) {
          return fail("missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema["properties"].items()) {
        if (!value.contains(key)) continue;
        if (!validate(value[key], sub, error, where + "." + key)) return false;
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!validate(value[i], schema["items"], error, where + "[" + std::to_string(i) + "]")) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace schema_check
