#pragma once

// Thin helpers over yaml-cpp: syntax errors and duplicate keys become
// position-annotated exceptions, and scalars are read with the strict
// parsers from format.hpp rather than yaml-cpp's stream conversions.

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "rlrepro/error.hpp"
#include "rlrepro/format.hpp"

namespace rlrepro::yaml {

namespace detail {

inline void reject_duplicate_keys(const YAML::Node& node) {
  if (node.IsMap()) {
    std::set<std::string> seen;
    for (const auto& kv : node) {
      const std::string key = kv.first.IsScalar() ? kv.first.Scalar() : "<complex key>";
      if (!seen.insert(key).second) {
        const auto m = kv.first.Mark();
        throw SyntaxError("duplicate key '" + key + "'", static_cast<std::size_t>(m.line + 1),
                          static_cast<std::size_t>(m.column + 1));
      }
      reject_duplicate_keys(kv.second);
    }
  } else if (node.IsSequence()) {
    for (const auto& item : node) reject_duplicate_keys(item);
  }
}

}  // namespace detail

/// Parse a YAML document; throws SyntaxError (1-based position) on
/// malformed input or duplicate mapping keys.
inline YAML::Node load(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw SyntaxError(e.msg, static_cast<std::size_t>(e.mark.line + 1),
                      static_cast<std::size_t>(e.mark.column + 1));
  }
  detail::reject_duplicate_keys(root);
  return root;
}

inline std::string scalar_text(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw SchemaError(key, "must be a scalar");
  return node.Scalar();
}

inline std::string as_string(const YAML::Node& node, const std::string& key) {
  return scalar_text(node, key);
}

inline std::int64_t as_int(const YAML::Node& node, const std::string& key) {
  const auto v = fmt::parse_int(scalar_text(node, key));
  if (!v) throw SchemaError(key, "must be an integer");
  return *v;
}

inline double as_double(const YAML::Node& node, const std::string& key) {
  const auto v = fmt::parse_double(scalar_text(node, key));
  if (!v) throw SchemaError(key, "must be a number");
  return *v;
}

inline bool as_bool(const YAML::Node& node, const std::string& key) {
  const auto s = scalar_text(node, key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw SchemaError(key, "must be true or false");
}

inline YAML::Node require(const YAML::Node& map, const std::string& key) {
  const auto n = map[key];
  if (!n) throw SchemaError(key, "is required");
  return n;
}

/// YAML double-quoted string literal.
inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (ch < 0x20) {
          static constexpr char hex[] = "0123456789abcdef";
          out += "\\x";
          out += hex[ch >> 4];
          out += hex[ch & 0xF];
        } else {
          out += static_cast<char>(ch);
        }
    }
  }
  return out + "\"";
}

/// Mapping keys made of identifier characters are written bare.
inline std::string key(std::string_view k) {
  const bool plain = !k.empty() && (std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_') &&
                     k.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") ==
                         std::string_view::npos;
  return plain ? std::string(k) : quote(k);
}

}  // namespace rlrepro::yaml
