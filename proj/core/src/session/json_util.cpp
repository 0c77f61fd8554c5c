#include "json_util.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hoi::detail {

namespace {

bool isScalar(const Json& v) {
  return v.is_number() || v.is_boolean() || v.is_null();
}

void write(std::string& out, const Json& v, int precision, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(key).dump() + ": ";
        write(out, item, precision, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const Json& item : v) flat = flat && isScalar(item);
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write(out, v[i], precision, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(out, v[i], precision, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw Error(ErrorCode::NonFinite, "cannot serialize a non-finite number");
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.*g", precision, d == 0.0 ? 0.0 : d);
      out += buf;
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string canonicalJson(const Json& value, int precision) {
  std::string out;
  write(out, value, precision, 0);
  out += "\n";
  return out;
}

Json parseJson(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

std::string readTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingAsset, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeTextFileAtomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move " + tmp.string() + " to " + path.string());
}

bool Reader::has(const std::string& key) const {
  return value_.is_object() && value_.contains(key);
}

Reader Reader::at(const std::string& key) const {
  if (!value_.is_object()) fail("expected an object");
  auto it = value_.find(key);
  if (it == value_.end()) throw Error(code_, (path_.empty() ? key : path_ + "." + key) + ": missing field");
  return Reader(*it, path_.empty() ? key : path_ + "." + key, code_);
}

Reader Reader::at(std::size_t index) const {
  if (!value_.is_array() || index >= value_.size()) fail("index " + std::to_string(index) + " out of range");
  return Reader(value_[index], path_ + "[" + std::to_string(index) + "]", code_);
}

std::size_t Reader::size() const {
  if (!value_.is_array()) fail("expected an array");
  return value_.size();
}

double Reader::number() const {
  if (!value_.is_number()) fail("expected a number");
  const double d = value_.get<double>();
  if (!std::isfinite(d)) fail("expected a finite number");
  return d;
}

int Reader::integer() const {
  if (!value_.is_number_integer()) fail("expected an integer");
  const auto i = value_.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) fail("integer out of range");
  return static_cast<int>(i);
}

bool Reader::boolean() const {
  if (!value_.is_boolean()) fail("expected a boolean");
  return value_.get<bool>();
}

std::string Reader::string() const {
  if (!value_.is_string()) fail("expected a string");
  return value_.get<std::string>();
}

Vec2 Reader::vec2() const {
  if (size() != 2) fail("expected 2 numbers");
  return {at(0).number(), at(1).number()};
}

Vec3 Reader::vec3() const {
  if (size() != 3) fail("expected 3 numbers");
  return {at(0).number(), at(1).number(), at(2).number()};
}

Quat Reader::quat() const {
  if (size() != 4) fail("expected 4 numbers [w, x, y, z]");
  Quat q(at(0).number(), at(1).number(), at(2).number(), at(3).number());
  const double n = q.norm();
  if (!(n > 0.5 && n < 1.5)) fail("quaternion is far from unit length");
  return std::abs(n - 1.0) <= 1e-12 ? q : q.normalized();
}

void Reader::onlyKeys(std::initializer_list<const char*> allowed) const {
  if (!value_.is_object()) fail("expected an object");
  for (const auto& [key, item] : value_.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(code_, (path_.empty() ? key : path_ + "." + key) + ": unknown field");
  }
}

void Reader::fail(const std::string& message) const {
  throw Error(code_, (path_.empty() ? std::string("document") : path_) + ": " + message);
}

Json toJson(const Vec2& v) {
  return Json::array({v.x(), v.y()});
}

Json toJson(const Vec3& v) {
  return Json::array({v.x(), v.y(), v.z()});
}

Json toJson(const Quat& q) {
  return Json::array({q.w(), q.x(), q.y(), q.z()});
}

}  // namespace hoi::detail
