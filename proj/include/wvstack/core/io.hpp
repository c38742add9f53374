#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wvstack/core/error.hpp"

namespace wvstack {

using json = nlohmann::json;

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed on " + path.string());
}

/// Parses a text document; syntax errors surface as `on_syntax`.
inline json parse_document(const std::string& text, Errc on_syntax = Errc::MalformedManifest) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(on_syntax, e.what());
  }
}

inline json read_document(const std::filesystem::path& path, Errc on_syntax = Errc::MalformedManifest) {
  return parse_document(read_text(path), on_syntax);
}

inline void write_document(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

/// Typed field access that reports the missing or mistyped key by name.
template <class T>
T get_field(const json& obj, const char* key, Errc on_type = Errc::MalformedManifest) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::MissingField, key);
  try {
    return it->template get<T>();
  } catch (const json::exception&) {
    throw Error(on_type, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_field_or(const json& obj, const char* key, T fallback, Errc on_type = Errc::MalformedManifest) {
  if (!obj.contains(key)) return fallback;
  return get_field<T>(obj, key, on_type);
}

}  // namespace wvstack
