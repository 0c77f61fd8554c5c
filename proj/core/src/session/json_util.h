#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "hoi/common/error.h"
#include "hoi/geometry/rotation.h"

namespace hoi::detail {

using Json = nlohmann::json;

/// Pretty JSON with sorted keys, numeric arrays on one line, and floats
/// printed with `precision` significant digits.
std::string canonicalJson(const Json& value, int precision);

/// Parses text; syntax errors become ParseError.
Json parseJson(const std::string& text, const std::string& what);

std::string readTextFile(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void writeTextFileAtomic(const std::filesystem::path& path, const std::string& text);

/// Typed field access that reports failures as `code` with the field path.
class Reader {
 public:
  Reader(const Json& value, std::string path, ErrorCode code = ErrorCode::InvariantViolation)
      : value_(value), path_(std::move(path)), code_(code) {}

  const Json& json() const {
    return value_;
  }
  const std::string& path() const {
    return path_;
  }
  bool has(const std::string& key) const;
  Reader at(const std::string& key) const;
  Reader at(std::size_t index) const;
  std::size_t size() const;  // arrays only

  double number() const;
  int integer() const;
  bool boolean() const;
  std::string string() const;
  Vec2 vec2() const;
  Vec3 vec3() const;
  Quat quat() const;  // [w, x, y, z]; renormalized unless within 1e-12 of unit length

  /// Throws when the object carries keys outside `allowed`.
  void onlyKeys(std::initializer_list<const char*> allowed) const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const Json& value_;
  std::string path_;
  ErrorCode code_;
};

Json toJson(const Vec2& v);
Json toJson(const Vec3& v);
Json toJson(const Quat& q);  // [w, x, y, z]

}  // namespace hoi::detail
