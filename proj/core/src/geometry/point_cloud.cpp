#include "hoi/geometry/point_cloud.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "hoi/common/error.h"
#include "ply_io.h"

namespace hoi {

struct PointCloud::KdTree {
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  std::vector<Vec3> pts;
  std::vector<Node> nodes;
  int root = -1;

  explicit KdTree(const std::vector<Vec3>& points) : pts(points) {
    std::vector<int> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes.reserve(points.size());
    root = build(idx, 0, static_cast<int>(idx.size()), 0);
  }

  int build(std::vector<int>& idx, int begin, int end, int depth) {
    if (begin >= end) {
      return -1;
    }
    const int axis = depth % 3;
    const int mid = (begin + end) / 2;
    std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end, [&](int a, int b) {
      return pts[a][axis] < pts[b][axis] || (pts[a][axis] == pts[b][axis] && a < b);
    });
    const int n = static_cast<int>(nodes.size());
    nodes.push_back({idx[mid], axis, -1, -1});
    const int l = build(idx, begin, mid, depth + 1);
    const int r = build(idx, mid + 1, end, depth + 1);
    nodes[n].left = l;
    nodes[n].right = r;
    return n;
  }

  void search(int node, const Vec3& q, int& best, double& bestSq) const {
    if (node < 0) {
      return;
    }
    const Node& nd = nodes[node];
    const double d2 = (pts[nd.point] - q).squaredNorm();
    if (d2 < bestSq || (d2 == bestSq && nd.point < best)) {
      bestSq = d2;
      best = nd.point;
    }
    const double diff = q[nd.axis] - pts[nd.point][nd.axis];
    const int nearSide = diff < 0.0 ? nd.left : nd.right;
    const int farSide = diff < 0.0 ? nd.right : nd.left;
    search(nearSide, q, best, bestSq);
    if (diff * diff <= bestSq) {
      search(farSide, q, best, bestSq);
    }
  }
};

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Vec2> pixels)
    : points_(std::move(points)), pixels_(std::move(pixels)) {
  if (!pixels_.empty() && pixels_.size() != points_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pixel coordinate count differs from point count");
  }
  tree_ = std::make_shared<KdTree>(points_);
}

int PointCloud::nearest(const Vec3& q) const {
  if (points_.empty()) {
    return -1;
  }
  int best = -1;
  double bestSq = std::numeric_limits<double>::infinity();
  tree_->search(tree_->root, q, best, bestSq);
  return best;
}

PointCloud loadPointCloud(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingAsset, path.string());
  }
  return PointCloud(detail::readPly(path).vertices);
}

namespace {

struct Fit {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();
  double cost = std::numeric_limits<double>::infinity();
};

double matchCost(const std::vector<Vec3>& rotated, const PointCloud& cloud, double s, const Vec3& t,
                 std::vector<Vec3>* matches) {
  double cost = 0.0;
  for (std::size_t i = 0; i < rotated.size(); ++i) {
    const Vec3 y = s * rotated[i] + t;
    const Vec3& c = cloud.points()[cloud.nearest(y)];
    cost += (y - c).squaredNorm();
    if (matches) {
      (*matches)[i] = c;
    }
  }
  return cost;
}

// Alternates nearest-neighbor matching with the closed-form scale/translation
// fit for fixed matches; the cost is non-increasing.
Fit refine(const std::vector<Vec3>& rotated, const PointCloud& cloud, Fit fit,
           const DepthAlignmentOptions& options) {
  const std::size_t n = rotated.size();
  std::vector<Vec3> matches(n);
  fit.cost = matchCost(rotated, cloud, fit.scale, fit.translation, &matches);
  for (int it = 0; it < options.maxIterations; ++it) {
    Vec3 uMean = Vec3::Zero();
    Vec3 cMean = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      uMean += rotated[i];
      cMean += matches[i];
    }
    uMean /= static_cast<double>(n);
    cMean /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += (rotated[i] - uMean).dot(matches[i] - cMean);
      den += (rotated[i] - uMean).squaredNorm();
    }
    if (den <= 0.0 || num <= 0.0) {
      break;
    }
    const double s = num / den;
    const Vec3 t = cMean - s * uMean;
    std::vector<Vec3> nextMatches(n);
    const double cost = matchCost(rotated, cloud, s, t, &nextMatches);
    if (!(cost < fit.cost)) {
      break;
    }
    const double decrease = fit.cost - cost;
    fit = {s, t, cost};
    matches.swap(nextMatches);
    if (decrease <= options.relativeTolerance * std::max(cost, 1e-300)) {
      break;
    }
  }
  return fit;
}

}  // namespace

RigidPose alignToDepth(const TriangleMesh& objectMesh, const RigidPose& initial,
                       const PointCloud& depthCloud, const DepthAlignmentOptions& options) {
  if (depthCloud.size() < 10) {
    throw Error(ErrorCode::DegenerateCloud,
                "depth cloud has " + std::to_string(depthCloud.size()) + " points (< 10)");
  }
  const std::vector<Vec3> samples = objectMesh.samplePoints();
  if (samples.empty()) {
    return initial;
  }
  std::vector<Vec3> rotated(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rotated[i] = initial.rotation() * samples[i];
  }

  // Candidate 1: the given pose. Candidate 2: moment matching (centroid and
  // RMS radius), which is exact when the cloud covers the whole sampled surface.
  Fit fromInitial{initial.scale(), initial.translation()};
  Vec3 uMean = Vec3::Zero();
  for (const Vec3& u : rotated) uMean += u;
  uMean /= static_cast<double>(rotated.size());
  Vec3 cMean = Vec3::Zero();
  for (const Vec3& c : depthCloud.points()) cMean += c;
  cMean /= static_cast<double>(depthCloud.size());
  double uVar = 0.0;
  for (const Vec3& u : rotated) uVar += (u - uMean).squaredNorm();
  uVar /= static_cast<double>(rotated.size());
  double cVar = 0.0;
  for (const Vec3& c : depthCloud.points()) cVar += (c - cMean).squaredNorm();
  cVar /= static_cast<double>(depthCloud.size());

  Fit best = refine(rotated, depthCloud, fromInitial, options);
  if (uVar > 0.0 && cVar > 0.0) {
    const double s = std::sqrt(cVar / uVar);
    const Fit moments = refine(rotated, depthCloud, Fit{s, cMean - s * uMean}, options);
    if (moments.cost < best.cost) {
      best = moments;
    }
  }
  return RigidPose(initial.rotation(), best.translation, best.scale);
}

}  // namespace hoi
