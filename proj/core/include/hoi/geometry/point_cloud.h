#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "hoi/geometry/mesh.h"
#include "hoi/geometry/rigid_pose.h"

namespace hoi {

/// Unordered 3D points (meters) with optional source-pixel coordinates and a
/// kd-tree for nearest-neighbor queries.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points, std::vector<Vec2> pixels = {});

  const std::vector<Vec3>& points() const {
    return points_;
  }
  const std::vector<Vec2>& pixels() const {
    return pixels_;
  }
  std::size_t size() const {
    return points_.size();
  }
  bool empty() const {
    return points_.empty();
  }

  /// Index of the nearest point; ties resolve to the lower index.
  int nearest(const Vec3& q) const;

 private:
  struct KdTree;

  std::vector<Vec3> points_;
  std::vector<Vec2> pixels_;
  std::shared_ptr<const KdTree> tree_;
};

PointCloud loadPointCloud(const std::filesystem::path& path);

struct DepthAlignmentOptions {
  int maxIterations = 50;
  double relativeTolerance = 1e-12;
};

/// Coarse depth-aware initialization: fits scale and translation (rotation
/// held) so the transformed mesh sample points land on their nearest
/// depth-cloud neighbors in the least-squares sense. Throws DegenerateCloud
/// for clouds with fewer than 10 points.
RigidPose alignToDepth(const TriangleMesh& objectMesh, const RigidPose& initial,
                       const PointCloud& depthCloud, const DepthAlignmentOptions& options = {});

}  // namespace hoi
