#pragma once

// Path-tracking accessors shared by the JSON readers. Failures raise
// MISSING_FIELD / TYPE_MISMATCH carrying the dotted path of the value.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chakra/error.h"
#include "json.hpp"

namespace chakra::jsonutil {

using Json = nlohmann::json;

inline std::string child_path(std::string_view parent, std::string_view key) {
  if (parent.empty()) return std::string(key);
  std::string out(parent);
  out += '.';
  out += key;
  return out;
}

inline std::string index_path(std::string_view parent, size_t i) {
  return std::string(parent) + "[" + std::to_string(i) + "]";
}

Json parse_document(std::string_view bytes);

const Json& require(const Json& obj, std::string_view key, std::string_view path);
const Json* find(const Json& obj, std::string_view key);

void expect_object(const Json& j, std::string_view path);
void expect_array(const Json& j, std::string_view path);

uint64_t as_u64(const Json& j, std::string_view path);
int64_t as_i64(const Json& j, std::string_view path);
double as_number(const Json& j, std::string_view path);
bool as_bool(const Json& j, std::string_view path);
std::string as_string(const Json& j, std::string_view path);
std::vector<uint64_t> as_u64_list(const Json& j, std::string_view path);
std::vector<int64_t> as_i64_list(const Json& j, std::string_view path);

// Field helpers on an object at `path`.
uint64_t req_u64(const Json& obj, std::string_view key, std::string_view path);
std::string req_string(const Json& obj, std::string_view key, std::string_view path);
std::optional<uint64_t> opt_u64(const Json& obj, std::string_view key,
                                std::string_view path);
std::optional<std::string> opt_string(const Json& obj, std::string_view key,
                                      std::string_view path);
std::vector<uint64_t> opt_u64_list(const Json& obj, std::string_view key,
                                   std::string_view path);

}  // namespace chakra::jsonutil
