#include "ply_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hoi/common/error.h"

namespace hoi::detail {

namespace {

enum class Format { Ascii, BinaryLittle, BinaryBig };

enum class Scalar { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

Scalar parseScalar(const std::string& name) {
  if (name == "char" || name == "int8") return Scalar::Int8;
  if (name == "uchar" || name == "uint8") return Scalar::UInt8;
  if (name == "short" || name == "int16") return Scalar::Int16;
  if (name == "ushort" || name == "uint16") return Scalar::UInt16;
  if (name == "int" || name == "int32") return Scalar::Int32;
  if (name == "uint" || name == "uint32") return Scalar::UInt32;
  if (name == "float" || name == "float32") return Scalar::Float32;
  if (name == "double" || name == "float64") return Scalar::Float64;
  throw Error(ErrorCode::ParseError, "unknown PLY scalar type '" + name + "'");
}

std::size_t scalarSize(Scalar s) {
  switch (s) {
    case Scalar::Int8:
    case Scalar::UInt8:
      return 1;
    case Scalar::Int16:
    case Scalar::UInt16:
      return 2;
    case Scalar::Int32:
    case Scalar::UInt32:
    case Scalar::Float32:
      return 4;
    case Scalar::Float64:
      return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::Float32;
  bool isList = false;
  Scalar countType = Scalar::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

class Reader {
 public:
  Reader(std::istream& in, Format format) : in_(in), format_(format) {}

  double read(Scalar type) {
    if (format_ == Format::Ascii) {
      double v = 0.0;
      if (!(in_ >> v)) {
        throw Error(ErrorCode::ParseError, "truncated ascii PLY body");
      }
      return v;
    }
    unsigned char buf[8];
    const std::size_t n = scalarSize(type);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      throw Error(ErrorCode::ParseError, "truncated binary PLY body");
    }
    const bool swap = (format_ == Format::BinaryBig) == (std::endian::native == std::endian::little);
    if (swap) {
      for (std::size_t i = 0; i < n / 2; ++i) {
        std::swap(buf[i], buf[n - 1 - i]);
      }
    }
    switch (type) {
      case Scalar::Int8: {
        int8_t v;
        std::memcpy(&v, buf, 1);
        return v;
      }
      case Scalar::UInt8:
        return buf[0];
      case Scalar::Int16: {
        int16_t v;
        std::memcpy(&v, buf, 2);
        return v;
      }
      case Scalar::UInt16: {
        uint16_t v;
        std::memcpy(&v, buf, 2);
        return v;
      }
      case Scalar::Int32: {
        int32_t v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::UInt32: {
        uint32_t v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::Float32: {
        float v;
        std::memcpy(&v, buf, 4);
        return v;
      }
      case Scalar::Float64: {
        double v;
        std::memcpy(&v, buf, 8);
        return v;
      }
    }
    return 0.0;
  }

 private:
  std::istream& in_;
  Format format_;
};

}  // namespace

PlyData readPly(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) {
    throw Error(ErrorCode::ParseError, path.string() + " is not a PLY file");
  }
  Format format = Format::Ascii;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") {
        format = Format::Ascii;
      } else if (f == "binary_little_endian") {
        format = Format::BinaryLittle;
      } else if (f == "binary_big_endian") {
        format = Format::BinaryBig;
      } else {
        throw Error(ErrorCode::ParseError, "unsupported PLY format " + f);
      }
    } else if (key == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) {
        throw Error(ErrorCode::ParseError, "PLY property before element");
      }
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string countType, itemType;
        ls >> countType >> itemType >> p.name;
        p.isList = true;
        p.countType = parseScalar(countType);
        p.type = parseScalar(itemType);
      } else {
        p.type = parseScalar(type);
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (key == "end_header") {
      break;
    }
  }

  PlyData data;
  Reader reader(in, format);
  for (const Element& e : elements) {
    const bool isVertex = e.name == "vertex";
    const bool isFace = e.name == "face";
    if (isVertex) {
      data.vertices.reserve(e.count);
    }
    for (std::size_t i = 0; i < e.count; ++i) {
      Vec3 v = Vec3::Zero();
      for (const Property& p : e.properties) {
        if (p.isList) {
          const auto n = static_cast<std::size_t>(reader.read(p.countType));
          std::vector<int> idx(n);
          for (std::size_t k = 0; k < n; ++k) {
            idx[k] = static_cast<int>(reader.read(p.type));
          }
          if (isFace && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            data.polygons.push_back(std::move(idx));
          }
        } else {
          const double value = reader.read(p.type);
          if (isVertex) {
            if (p.name == "x") v.x() = value;
            if (p.name == "y") v.y() = value;
            if (p.name == "z") v.z() = value;
          }
        }
      }
      if (isVertex) {
        data.vertices.push_back(v);
      }
    }
  }
  return data;
}

void writePlyBinary(const std::filesystem::path& path, const std::vector<Vec3>& vertices,
                    const std::vector<Face>& faces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  static_assert(std::endian::native == std::endian::little, "writer assumes little endian");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : vertices) {
    out.write(reinterpret_cast<const char*>(v.data()), 3 * sizeof(double));
  }
  for (const Face& f : faces) {
    const unsigned char n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    for (int idx : f) {
      const int32_t v = idx;
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
}

}  // namespace hoi::detail
