#pragma once

#include <cstdint>

#include <filesystem>
#include <vector>

#include "hoi/geometry/camera.h"
#include "hoi/geometry/mesh.h"
#include "hoi/geometry/rigid_pose.h"
#include "hoi/skeleton/skeleton.h"

namespace hoi {

/// Row-major single-channel image with values in [0, 1]. Pixel (x, y) covers
/// [x, x+1) x [y, y+1) in camera pixel coordinates.
class MaskImage {
 public:
  MaskImage() = default;
  MaskImage(int width, int height, double fill = 0.0);

  int width() const {
    return width_;
  }
  int height() const {
    return height_;
  }
  double& operator()(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double operator()(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<double>& values() const {
    return values_;
  }
  std::vector<double>& values() {
    return values_;
  }

  double sum() const;
  /// Number of pixels with value >= threshold.
  int count(double threshold = 0.5) const;
  /// Throws InvalidArgument if any value lies outside [0, 1] or is NaN.
  void validate() const;

  bool operator==(const MaskImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-pixel Euclidean distance (pixels) to the nearest edge pixel. Every
/// entry is +infinity when there are no edge pixels.
class DistanceField {
 public:
  DistanceField() = default;
  DistanceField(int width, int height, double fill);

  int width() const {
    return width_;
  }
  int height() const {
    return height_;
  }
  double& operator()(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double operator()(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<double>& values() const {
    return values_;
  }
  bool empty() const;  // true for the no-edge sentinel field

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

struct RasterOptions {
  double sigma = 1.0;  // sigmoid width in pixels
};

/// Soft silhouette: each pixel centre gets sigmoid(d / sigma) where d is its
/// signed distance to the projected outline of a triangle (positive inside),
/// composited by max. Values are exactly 1 beyond 6 sigma inside and exactly
/// 0 beyond 6 sigma outside. Edges shared with a neighbouring face that
/// continues on the other side are not outline. Triangles are clipped
/// against the near plane; fully hidden ones are culled.
MaskImage rasterizeSilhouette(const TriangleMesh& mesh, const RigidPose& pose, const CameraModel& camera,
                              const RasterOptions& options = {});

/// rendered * (1 - otherGroundTruth), pixelwise. Throws DimensionMismatch.
MaskImage occlusionMask(const MaskImage& rendered, const MaskImage& otherGroundTruth);

/// 3x3 max-pool minus the mask, clamped to [0, 1].
MaskImage extractEdges(const MaskImage& mask);

/// Exact Euclidean distance transform to pixels with value >= 0.5.
DistanceField distanceTransform(const MaskImage& edges);

MaskImage binarize(const MaskImage& mask, double threshold = 0.5);

/// Reads an 8-bit PNG (converted to grey) and binarizes at 128.
MaskImage loadMaskPng(const std::filesystem::path& path);
/// Writes an 8-bit grey PNG, value * 255 rounded.
void saveMaskPng(const MaskImage& mask, const std::filesystem::path& path);

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t grey = 0) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, grey) {}
};

RgbImage loadRgbPng(const std::filesystem::path& path);
/// PNG file bytes.
std::vector<std::uint8_t> encodePng(const RgbImage& image);

/// Tints the covered pixels of each mask (human red, object green) at 50%
/// opacity. Masks must match the background size.
RgbImage overlayMasks(const RgbImage& background, const MaskImage& human, const MaskImage& object);

/// Smallest integer factor that brings max(width, height) to <= maxDimension.
int downsampleFactor(int width, int height, int maxDimension = 256);
/// Area-average downsampling; output is ceil(width / factor) x ceil(height / factor).
MaskImage downsampleMask(const MaskImage& mask, int factor);
/// Intrinsics matching downsampleMask at the same factor.
CameraModel downsampleCamera(const CameraModel& camera, int factor);

/// Closed triangle mesh approximating a capsule (world coordinates).
TriangleMesh capsuleMesh(const Capsule& capsule, int segments = 12, int capRings = 3);
/// Union of capsule meshes for a posed skeleton, used as the human silhouette proxy.
TriangleMesh humanProxyMesh(const std::vector<Capsule>& capsules);

}  // namespace hoi
