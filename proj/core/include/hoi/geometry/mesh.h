#pragma once

#include <array>
#include <limits>
#include <filesystem>
#include <memory>
#include <vector>

#include "hoi/geometry/rotation.h"

namespace hoi {

using Face = std::array<int, 3>;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool contains(const Vec3& p, double pad = 0.0) const {
    return (p.array() >= min.array() - pad).all() && (p.array() <= max.array() + pad).all();
  }
  double squaredDistance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(0.0);
    return d.squaredNorm();
  }
  Vec3 extent() const {
    return max - min;
  }
};

struct SurfacePoint {
  double distance = 0.0;
  Vec3 point = Vec3::Zero();
  int face = -1;
};

/// Closest point on triangle (a, b, c) to p.
Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Immutable indexed triangle mesh in object-local coordinates (meters).
///
/// Construction validates face indices, drops degenerate faces, computes
/// edge adjacency and a watertightness flag, and builds an AABB tree over the
/// faces. Copies share the tree.
class TriangleMesh {
 public:
  TriangleMesh();
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const {
    return vertices_;
  }
  const std::vector<Face>& faces() const {
    return faces_;
  }
  bool empty() const {
    return faces_.empty();
  }
  const Aabb& bounds() const {
    return bounds_;
  }

  /// Every undirected edge is shared by exactly two faces with opposite
  /// orientation.
  bool isWatertight() const {
    return watertight_;
  }

  /// Number of faces dropped as degenerate at construction.
  int removedDegenerateFaces() const {
    return removedDegenerate_;
  }

  /// For face f, neighbor across edge (f[k], f[(k+1)%3]); -1 on boundary or
  /// non-manifold edges.
  const std::vector<std::array<int, 3>>& faceNeighbors() const {
    return neighbors_;
  }

  /// Generalized winding number (sum of signed solid angles / 4pi).
  double windingNumber(const Vec3& p) const;

  /// Inside test: |winding number| >= 0.5, with points on the surface counted
  /// as inside. Throws NotWatertight for open meshes.
  bool contains(const Vec3& p) const;

  /// Exact minimum distance to the surface, accelerated by the face tree.
  SurfacePoint closestPoint(const Vec3& p) const;

  TriangleMesh scaled(double s) const;

  /// Vertices followed by face centroids; deterministic.
  std::vector<Vec3> samplePoints() const;

 private:
  struct Bvh;

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> neighbors_;
  Aabb bounds_;
  bool watertight_ = false;
  int removedDegenerate_ = 0;
  std::shared_ptr<const Bvh> bvh_;
};

bool contains(const TriangleMesh& mesh, const Vec3& p);
SurfacePoint surfaceDistance(const TriangleMesh& mesh, const Vec3& p);

/// Axis-aligned box centered at the origin, 12 outward-facing triangles.
TriangleMesh makeBox(const Vec3& halfExtent);

/// UV sphere with outward-facing triangles.
TriangleMesh makeSphere(double radius, int rings = 12, int segments = 24);

TriangleMesh loadMesh(const std::filesystem::path& path);
TriangleMesh loadObj(const std::filesystem::path& path);
TriangleMesh loadPly(const std::filesystem::path& path);
void saveObj(const TriangleMesh& mesh, const std::filesystem::path& path);
void savePlyBinary(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace hoi
