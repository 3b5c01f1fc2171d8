#pragma once

// Strict JSON field access. Every failure throws Error(kInvalidArgument) with
// the dotted path of the offending field.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "therasim/error.hpp"

namespace therasim::detail {

using nlohmann::json;

inline std::string join_path(const std::string& where, std::string_view key) {
  if (where.empty()) return std::string(key);
  return where + "." + std::string(key);
}

inline void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, where + ": expected an object");
}

inline void expect_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::kInvalidArgument, where + ": expected an array");
}

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto candidate : allowed) known = known || candidate == key;
    if (!known) fail(ErrorCode::kInvalidArgument, join_path(where, key) + ": unknown key");
  }
}

inline const json& require(const json& j, std::string_view key, const std::string& where) {
  auto it = j.find(std::string(key));
  if (it == j.end()) fail(ErrorCode::kInvalidArgument, join_path(where, key) + ": missing");
  return *it;
}

inline const json* find(const json& j, std::string_view key) {
  auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

inline std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(ErrorCode::kInvalidArgument, where + ": expected a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorCode::kInvalidArgument, where + ": expected a number");
  return v.get<double>();
}

inline std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(ErrorCode::kInvalidArgument, where + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t as_uint64(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(ErrorCode::kInvalidArgument, where + ": expected a nonnegative integer");
}

inline bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(ErrorCode::kInvalidArgument, where + ": expected a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& j, std::string_view key, const std::string& where) {
  return as_string(require(j, key, where), join_path(where, key));
}

inline double get_number(const json& j, std::string_view key, const std::string& where) {
  return as_number(require(j, key, where), join_path(where, key));
}

inline std::int64_t get_int(const json& j, std::string_view key, const std::string& where) {
  return as_int(require(j, key, where), join_path(where, key));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
}

}  // namespace therasim::detail
