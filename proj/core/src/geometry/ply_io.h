#pragma once

#include <filesystem>
#include <vector>

#include "hoi/geometry/mesh.h"

namespace hoi::detail {

struct PlyData {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> polygons;
};

/// Reads the `vertex` (x, y, z) and `face` (vertex index list) elements of an
/// ascii or binary PLY file; all other elements and properties are skipped.
PlyData readPly(const std::filesystem::path& path);

void writePlyBinary(const std::filesystem::path& path, const std::vector<Vec3>& vertices,
                    const std::vector<Face>& faces);

}  // namespace hoi::detail
