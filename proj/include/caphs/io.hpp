#pragma once

// JSON formats for instances and solutions. Field names and key order are
// fixed; every document carries "format": 1.

#include <cstdint>
#include <string>
#include <string_view>

#include "caphs/core.hpp"
#include "json.hpp"

namespace caphs {

inline constexpr int kFormatVersion = 1;

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kMalformedInput, e.what());
  }
}

inline void check_format(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kMalformedInput, "top level must be an object");
  if (auto it = doc.find("format"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
      throw Error(ErrorKind::kMalformedInput, "unsupported format version");
    }
  }
}

inline std::int64_t get_int(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::kMalformedInput, std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) throw Error(ErrorKind::kMalformedInput, std::string("field '") + key + "' must be an integer");
  return it->get<std::int64_t>();
}

inline const nlohmann::json& get_array(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw Error(ErrorKind::kMalformedInput, std::string("field '") + key + "' must be an array");
  }
  return *it;
}

inline std::int64_t as_int(const nlohmann::json& v) {
  if (!v.is_number_integer()) throw Error(ErrorKind::kMalformedInput, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t parse_key(const std::string& key) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kMalformedInput, "object key is not an integer: '" + key + "'");
  }
}

}  // namespace detail

inline Instance instance_from_json(const nlohmann::json& doc) {
  detail::check_format(doc);
  const std::int64_t d = detail::get_int(doc, "d");
  if (d < 1 || d > INT32_MAX) throw Error(ErrorKind::kValidationError, "d must be a positive int");
  std::vector<Element> elements;
  for (const auto& e : detail::get_array(doc, "elements")) {
    if (!e.is_object()) throw Error(ErrorKind::kMalformedInput, "element must be an object");
    Element el;
    el.id = detail::get_int(e, "id");
    el.cap = detail::get_int(e, "cap");
    el.weight = detail::get_int(e, "weight");
    auto mult = e.find("mult");
    if (mult == e.end() || mult->is_null()) {
      el.mult = std::nullopt;
    } else {
      el.mult = detail::as_int(*mult);
    }
    elements.push_back(el);
  }
  std::vector<Subset> family;
  for (const auto& set : detail::get_array(doc, "family")) {
    if (!set.is_array()) throw Error(ErrorKind::kMalformedInput, "family entries must be arrays");
    Subset s;
    for (const auto& x : set) s.push_back(detail::as_int(x));
    family.push_back(std::move(s));
  }
  return Instance(static_cast<int>(d), std::move(elements), std::move(family));
}

inline Instance parse_instance(std::string_view text) { return instance_from_json(detail::parse_json(text)); }

inline nlohmann::ordered_json instance_to_json(const Instance& inst) {
  detail::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["d"] = inst.d();
  doc["elements"] = detail::ordered_json::array();
  for (const Element& e : inst.elements()) {
    detail::ordered_json el;
    el["id"] = e.id;
    el["cap"] = e.cap;
    el["mult"] = e.mult ? detail::ordered_json(*e.mult) : detail::ordered_json(nullptr);
    el["weight"] = e.weight;
    doc["elements"].push_back(std::move(el));
  }
  doc["family"] = detail::ordered_json::array();
  for (const Subset& set : inst.family()) doc["family"].push_back(set);
  return doc;
}

/// Compact, newline-terminated.
inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump() + "\n"; }

/// FNV-1a over the serialized form; used to pin generated instances.
inline std::uint64_t instance_digest(const Instance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_instance(inst)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Parsed solution document. The assignment is optional on input.
struct SolutionDoc {
  Solution sol;
  std::optional<Assignment> asg;
};

inline SolutionDoc parse_solution(std::string_view text, std::size_t family_size) {
  const nlohmann::json doc = detail::parse_json(text);
  detail::check_format(doc);
  auto copies = doc.find("copies");
  if (copies == doc.end() || !copies->is_object()) throw Error(ErrorKind::kMalformedInput, "field 'copies' must be an object");
  SolutionDoc out;
  for (const auto& [key, value] : copies->items()) {
    const std::int64_t c = detail::as_int(value);
    if (c < 0) throw Error(ErrorKind::kValidationError, "negative copy count");
    if (c > 0) out.sol.copies[detail::parse_key(key)] = c;
  }
  if (auto asg = doc.find("assignment"); asg != doc.end() && !asg->is_null()) {
    if (!asg->is_object()) throw Error(ErrorKind::kMalformedInput, "field 'assignment' must be an object");
    Assignment a;
    a.target.assign(family_size, -1);
    std::size_t seen = 0;
    for (const auto& [key, value] : asg->items()) {
      const std::int64_t idx = detail::parse_key(key);
      if (idx < 0 || static_cast<std::size_t>(idx) >= family_size) {
        throw Error(ErrorKind::kValidationError, "assignment names set index out of range");
      }
      a.target[static_cast<std::size_t>(idx)] = detail::as_int(value);
      ++seen;
    }
    if (seen != family_size) throw Error(ErrorKind::kValidationError, "assignment must cover every set index");
    out.asg = std::move(a);
  }
  return out;
}

inline nlohmann::ordered_json solution_to_json(const Solution& sol, const Assignment& asg) {
  detail::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["copies"] = detail::ordered_json::object();
  for (const auto& [x, c] : sol.copies) doc["copies"][std::to_string(x)] = c;
  doc["assignment"] = detail::ordered_json::object();
  for (std::size_t i = 0; i < asg.target.size(); ++i) doc["assignment"][std::to_string(i)] = asg.target[i];
  return doc;
}

}  // namespace caphs
