#include "hoi/silhouette/silhouette.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hoi/common/error.h"

namespace hoi {

namespace {

// Near clipping plane for rasterization (meters).
constexpr double kNearPlane = 1e-3;
// Soft coverage saturates to exactly 0 / 1 beyond this many sigmas.
constexpr double kCutoffSigmas = 6.0;

double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double segmentDistance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

struct Triangle2 {
  Vec2 v[3];
  bool exposed[3];  // edge k runs v[k] -> v[(k+1)%3]
};

void splat(const Triangle2& tri, double sigma, MaskImage& out) {
  const Vec2& a = tri.v[0];
  const Vec2& b = tri.v[1];
  const Vec2& c = tri.v[2];
  const double area2 = cross2(b - a, c - a);
  if (!(std::abs(area2) > 1e-12)) return;
  const double sign = area2 > 0.0 ? 1.0 : -1.0;
  const double reach = kCutoffSigmas * sigma;

  const double minX = std::min({a.x(), b.x(), c.x()}) - reach;
  const double maxX = std::max({a.x(), b.x(), c.x()}) + reach;
  const double minY = std::min({a.y(), b.y(), c.y()}) - reach;
  const double maxY = std::max({a.y(), b.y(), c.y()}) + reach;
  // Pixel centres sit at (i + 0.5, j + 0.5).
  const int x0 = std::max(0, static_cast<int>(std::ceil(minX - 0.5)));
  const int x1 = std::min(out.width() - 1, static_cast<int>(std::floor(maxX - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(minY - 0.5)));
  const int y1 = std::min(out.height() - 1, static_cast<int>(std::floor(maxY - 0.5)));

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double& px = out(x, y);
      if (px == 1.0) continue;
      const Vec2 p(x + 0.5, y + 0.5);
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        if (sign * cross2(tri.v[(k + 1) % 3] - tri.v[k], p - tri.v[k]) < 0.0) {
          inside = false;
          break;
        }
      }
      double d;
      if (inside) {
        d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
          if (tri.exposed[k]) d = std::min(d, segmentDistance(p, tri.v[k], tri.v[(k + 1) % 3]));
        }
      } else {
        d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) d = std::min(d, segmentDistance(p, tri.v[k], tri.v[(k + 1) % 3]));
        d = -d;
      }
      double value;
      if (d >= reach) {
        value = 1.0;
      } else if (d <= -reach) {
        continue;
      } else {
        value = 1.0 / (1.0 + std::exp(-d / sigma));
      }
      px = std::max(px, value);
    }
  }
}

Vec2 projectPixel(const CameraModel& cam, const Vec3& p) {
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

}  // namespace

MaskImage::MaskImage(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative image dimensions");
  }
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

double MaskImage::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

int MaskImage::count(double threshold) const {
  int n = 0;
  for (double v : values_) n += v >= threshold ? 1 : 0;
  return n;
}

void MaskImage::validate() const {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "mask value outside [0, 1]");
    }
  }
}

DistanceField::DistanceField(int width, int height, double fill) : width_(width), height_(height) {
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

bool DistanceField::empty() const {
  return values_.empty() || std::isinf(values_.front());
}

MaskImage rasterizeSilhouette(const TriangleMesh& mesh, const RigidPose& pose, const CameraModel& camera,
                              const RasterOptions& options) {
  camera.validate();
  if (!(options.sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "raster sigma must be positive");
  }
  MaskImage out(camera.width, camera.height);
  if (mesh.empty()) return out;

  std::vector<Vec3> world(mesh.vertices().size());
  std::vector<Vec2> pixel(world.size());
  std::vector<char> front(world.size());
  for (std::size_t i = 0; i < world.size(); ++i) {
    world[i] = pose.transformPoint(mesh.vertices()[i]);
    front[i] = world[i].z() > kNearPlane;
    if (front[i]) pixel[i] = projectPixel(camera, world[i]);
  }
  const auto& faces = mesh.faces();
  const auto& neighbors = mesh.faceNeighbors();
  auto fullyInFront = [&](int f) {
    return front[faces[f][0]] && front[faces[f][1]] && front[faces[f][2]];
  };

  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    const int inFront = front[face[0]] + front[face[1]] + front[face[2]];
    if (inFront == 0) continue;

    bool exposed[3];
    for (int k = 0; k < 3; ++k) {
      exposed[k] = true;
      const int g = neighbors[f][k];
      if (inFront < 3 || g < 0 || !fullyInFront(g)) continue;
      const int ia = face[k];
      const int ib = face[(k + 1) % 3];
      const int ic = face[(k + 2) % 3];
      int other = -1;
      for (int v : faces[g]) {
        if (v != ia && v != ib) other = v;
      }
      const Vec2 edge = pixel[ib] - pixel[ia];
      const double s1 = cross2(edge, pixel[ic] - pixel[ia]);
      const double s2 = cross2(edge, pixel[other] - pixel[ia]);
      // The neighbour continues the surface across the edge on screen.
      if ((s1 > 0.0 && s2 < 0.0) || (s1 < 0.0 && s2 > 0.0)) exposed[k] = false;
    }

    if (inFront == 3) {
      Triangle2 tri{{pixel[face[0]], pixel[face[1]], pixel[face[2]]}, {exposed[0], exposed[1], exposed[2]}};
      splat(tri, options.sigma, out);
      continue;
    }

    // Clip against the near plane; the clip edge and original edges are outline.
    std::vector<Vec3> poly;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = world[face[k]];
      const Vec3& q = world[face[(k + 1) % 3]];
      const bool pIn = p.z() > kNearPlane;
      const bool qIn = q.z() > kNearPlane;
      if (pIn) poly.push_back(p);
      if (pIn != qIn) {
        const double t = (kNearPlane - p.z()) / (q.z() - p.z());
        Vec3 r = p + t * (q - p);
        r.z() = kNearPlane;
        poly.push_back(r);
      }
    }
    std::vector<Vec2> poly2;
    for (const Vec3& p : poly) poly2.push_back(projectPixel(camera, p));
    for (std::size_t i = 1; i + 1 < poly2.size(); ++i) {
      const bool first = i == 1;
      const bool last = i + 2 == poly2.size();
      Triangle2 tri{{poly2[0], poly2[i], poly2[i + 1]}, {first, true, last}};
      splat(tri, options.sigma, out);
    }
  }
  return out;
}

MaskImage occlusionMask(const MaskImage& rendered, const MaskImage& otherGroundTruth) {
  if (rendered.width() != otherGroundTruth.width() || rendered.height() != otherGroundTruth.height()) {
    throw Error(ErrorCode::DimensionMismatch, "occlusion mask dimensions differ");
  }
  MaskImage out(rendered.width(), rendered.height());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out.values()[i] = rendered.values()[i] * (1.0 - otherGroundTruth.values()[i]);
  }
  return out;
}

MaskImage extractEdges(const MaskImage& mask) {
  const int w = mask.width();
  const int h = mask.height();
  MaskImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < w && yy < h) m = std::max(m, mask(xx, yy));
        }
      }
      out(x, y) = std::clamp(m - mask(x, y), 0.0, 1.0);
    }
  }
  return out;
}

namespace {

// One-dimensional squared distance transform: lower envelope of the
// parabolas rooted at the finite samples.
void edt1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (std::isinf(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    while (true) {
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

}  // namespace

DistanceField distanceTransform(const MaskImage& edges) {
  const int w = edges.width();
  const int h = edges.height();
  const double inf = std::numeric_limits<double>::infinity();
  if (edges.count(0.5) == 0) return DistanceField(w, h, inf);

  DistanceField out(w, h, inf);
  std::vector<double> grid(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = edges.values()[i] >= 0.5 ? 0.0 : inf;

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  // Columns, then rows.
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    edt1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    edt1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out(x, y) = std::sqrt(d[x]);
  }
  return out;
}

MaskImage binarize(const MaskImage& mask, double threshold) {
  MaskImage out(mask.width(), mask.height());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out.values()[i] = mask.values()[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

int downsampleFactor(int width, int height, int maxDimension) {
  if (maxDimension < 1) {
    throw Error(ErrorCode::InvalidArgument, "maximum dimension must be positive");
  }
  const int largest = std::max(width, height);
  return std::max(1, (largest + maxDimension - 1) / maxDimension);
}

MaskImage downsampleMask(const MaskImage& mask, int factor) {
  if (factor < 1) {
    throw Error(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
  }
  if (factor == 1) return mask;
  const int w = (mask.width() + factor - 1) / factor;
  const int h = (mask.height() + factor - 1) / factor;
  MaskImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int yy = y * factor; yy < std::min(mask.height(), (y + 1) * factor); ++yy) {
        for (int xx = x * factor; xx < std::min(mask.width(), (x + 1) * factor); ++xx) {
          s += mask(xx, yy);
          ++n;
        }
      }
      out(x, y) = s / n;
    }
  }
  return out;
}

CameraModel downsampleCamera(const CameraModel& camera, int factor) {
  if (factor < 1) {
    throw Error(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
  }
  CameraModel c = camera.scaled(1.0 / factor);
  c.width = (camera.width + factor - 1) / factor;
  c.height = (camera.height + factor - 1) / factor;
  return c;
}

TriangleMesh capsuleMesh(const Capsule& capsule, int segments, int capRings) {
  if (segments < 3 || capRings < 1 || !(capsule.radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid capsule tessellation");
  }
  Vec3 axis = capsule.b - capsule.a;
  Vec3 u = axis.norm() > 0.0 ? Vec3(axis.normalized()) : Vec3::UnitZ();
  Vec3 v = u.unitOrthogonal();
  Vec3 w = u.cross(v);
  const double r = capsule.radius;

  std::vector<Vec3> verts;
  std::vector<Face> faces;
  verts.push_back(capsule.a - r * u);  // south pole
  // Rings from the south cap up to the north cap; the two equators sit at a and b.
  std::vector<std::pair<const Vec3*, double>> rings;
  for (int i = 1; i <= capRings; ++i) rings.push_back({&capsule.a, -std::numbers::pi / 2 + i * std::numbers::pi / 2 / capRings});
  for (int i = 0; i < capRings; ++i) rings.push_back({&capsule.b, i * std::numbers::pi / 2 / capRings});
  for (const auto& [centre, phi] : rings) {
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / segments;
      verts.push_back(*centre + r * (std::sin(phi) * u + std::cos(phi) * (std::cos(theta) * v + std::sin(theta) * w)));
    }
  }
  verts.push_back(capsule.b + r * u);  // north pole
  const int north = static_cast<int>(verts.size()) - 1;
  const int numRings = static_cast<int>(rings.size());
  auto ring = [&](int i, int s) { return 1 + i * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) {
    faces.push_back({0, ring(0, s + 1), ring(0, s)});
    for (int i = 0; i + 1 < numRings; ++i) {
      faces.push_back({ring(i, s), ring(i, s + 1), ring(i + 1, s + 1)});
      faces.push_back({ring(i, s), ring(i + 1, s + 1), ring(i + 1, s)});
    }
    faces.push_back({ring(numRings - 1, s), ring(numRings - 1, s + 1), north});
  }
  double volume = 0.0;
  for (const Face& f : faces) volume += verts[f[0]].dot(verts[f[1]].cross(verts[f[2]]));
  if (volume < 0.0) {
    for (Face& f : faces) std::swap(f[1], f[2]);
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh humanProxyMesh(const std::vector<Capsule>& capsules) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (const Capsule& c : capsules) {
    if (!(c.radius > 0.0)) continue;
    const TriangleMesh m = capsuleMesh(c);
    const int base = static_cast<int>(verts.size());
    verts.insert(verts.end(), m.vertices().begin(), m.vertices().end());
    for (const Face& f : m.faces()) faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

}  // namespace hoi
