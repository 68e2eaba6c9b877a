#include "chakra/json_util.h"

namespace chakra::jsonutil {

namespace {

[[noreturn]] void mismatch(std::string_view path, std::string_view want) {
  throw Error(ErrorCode::TYPE_MISMATCH, std::string(path),
              "expected " + std::string(want));
}

}  // namespace

Json parse_document(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::MALFORMED_JSON, "", e.what());
  }
}

const Json* find(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const Json& require(const Json& obj, std::string_view key, std::string_view path) {
  const Json* v = find(obj, key);
  if (v == nullptr) throw Error(ErrorCode::MISSING_FIELD, child_path(path, key));
  return *v;
}

void expect_object(const Json& j, std::string_view path) {
  if (!j.is_object()) mismatch(path.empty() ? "$" : path, "object");
}

void expect_array(const Json& j, std::string_view path) {
  if (!j.is_array()) mismatch(path, "array");
}

uint64_t as_u64(const Json& j, std::string_view path) {
  if (!j.is_number_unsigned()) mismatch(path, "non-negative integer");
  return j.get<uint64_t>();
}

int64_t as_i64(const Json& j, std::string_view path) {
  if (j.is_number_integer() && !j.is_number_unsigned()) return j.get<int64_t>();
  if (j.is_number_unsigned()) {
    uint64_t v = j.get<uint64_t>();
    if (v > static_cast<uint64_t>(INT64_MAX)) mismatch(path, "int64");
    return static_cast<int64_t>(v);
  }
  mismatch(path, "integer");
}

double as_number(const Json& j, std::string_view path) {
  if (!j.is_number()) mismatch(path, "number");
  return j.get<double>();
}

bool as_bool(const Json& j, std::string_view path) {
  if (!j.is_boolean()) mismatch(path, "boolean");
  return j.get<bool>();
}

std::string as_string(const Json& j, std::string_view path) {
  if (!j.is_string()) mismatch(path, "string");
  return j.get<std::string>();
}

std::vector<uint64_t> as_u64_list(const Json& j, std::string_view path) {
  expect_array(j, path);
  std::vector<uint64_t> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_u64(j[i], index_path(path, i)));
  return out;
}

std::vector<int64_t> as_i64_list(const Json& j, std::string_view path) {
  expect_array(j, path);
  std::vector<int64_t> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) out.push_back(as_i64(j[i], index_path(path, i)));
  return out;
}

uint64_t req_u64(const Json& obj, std::string_view key, std::string_view path) {
  return as_u64(require(obj, key, path), child_path(path, key));
}

std::string req_string(const Json& obj, std::string_view key, std::string_view path) {
  return as_string(require(obj, key, path), child_path(path, key));
}

std::optional<uint64_t> opt_u64(const Json& obj, std::string_view key,
                                std::string_view path) {
  const Json* v = find(obj, key);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_u64(*v, child_path(path, key));
}

std::optional<std::string> opt_string(const Json& obj, std::string_view key,
                                      std::string_view path) {
  const Json* v = find(obj, key);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return as_string(*v, child_path(path, key));
}

std::vector<uint64_t> opt_u64_list(const Json& obj, std::string_view key,
                                   std::string_view path) {
  const Json* v = find(obj, key);
  if (v == nullptr) return {};
  return as_u64_list(*v, child_path(path, key));
}

}  // namespace chakra::jsonutil
