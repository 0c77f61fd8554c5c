#include "hoi/geometry/mesh.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "hoi/common/error.h"
#include "ply_io.h"

namespace hoi {

Vec3 closestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + ab * (d1 / (d1 - d3));
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + ac * (d2 / (d2 - d6));
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

struct TriangleMesh::Bvh {
  struct Node {
    Aabb box;
    int left = -1;  // child index; -1 for leaves
    int right = -1;
    int begin = 0;  // leaf face range into order
    int end = 0;
  };

  std::vector<Node> nodes;
  std::vector<int> order;

  static constexpr int kLeafSize = 4;

  Bvh(const std::vector<Vec3>& v, const std::vector<Face>& f) {
    order.resize(f.size());
    std::iota(order.begin(), order.end(), 0);
    if (f.empty()) {
      return;
    }
    std::vector<Vec3> centroids(f.size());
    std::vector<Aabb> boxes(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      centroids[i] = (v[f[i][0]] + v[f[i][1]] + v[f[i][2]]) / 3.0;
      for (int k : f[i]) {
        boxes[i].extend(v[k]);
      }
    }
    nodes.reserve(2 * f.size() / kLeafSize + 2);
    build(0, static_cast<int>(f.size()), centroids, boxes);
  }

  int build(int begin, int end, const std::vector<Vec3>& centroids, const std::vector<Aabb>& boxes) {
    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    Aabb box;
    Aabb centroidBox;
    for (int i = begin; i < end; ++i) {
      box.extend(boxes[order[i]]);
      centroidBox.extend(centroids[order[i]]);
    }
    nodes[index].box = box;
    if (end - begin <= kLeafSize) {
      nodes[index].begin = begin;
      nodes[index].end = end;
      return index;
    }
    int axis = 0;
    centroidBox.extent().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                       const double ca = centroids[a][axis];
                       const double cb = centroids[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const int left = build(begin, mid, centroids, boxes);
    const int right = build(mid, end, centroids, boxes);
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  }
};

TriangleMesh::TriangleMesh() : bvh_(std::make_shared<Bvh>(vertices_, faces_)) {}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.size());
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) {
      throw Error(ErrorCode::NonFinite, "mesh vertex is not finite");
    }
    bounds_.extend(v);
  }
  const double diag = vertices_.empty() ? 0.0 : bounds_.extent().norm();
  const double areaTol = 1e-12 * diag * diag;
  faces_.reserve(faces.size());
  for (const Face& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= nv) {
        throw Error(ErrorCode::InvariantViolation,
                    "face index " + std::to_string(idx) + " out of range for " +
                        std::to_string(nv) + " vertices");
      }
    }
    const double twiceArea =
        (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).norm();
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || twiceArea <= areaTol) {
      ++removedDegenerate_;
      continue;
    }
    faces_.push_back(f);
  }

  // Directed edge -> (face, local edge). A closed orientable surface has every
  // directed edge exactly once and its reverse exactly once.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> directed;
  for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi) {
    for (int k = 0; k < 3; ++k) {
      directed[{faces_[fi][k], faces_[fi][(k + 1) % 3]}].push_back({fi, k});
    }
  }
  neighbors_.assign(faces_.size(), {-1, -1, -1});
  watertight_ = !faces_.empty();
  for (const auto& [edge, uses] : directed) {
    const auto rev = directed.find({edge.second, edge.first});
    const std::size_t reverseUses = rev == directed.end() ? 0 : rev->second.size();
    if (uses.size() != 1 || reverseUses != 1) {
      watertight_ = false;
    }
    // Manifold neighbors: the edge is used exactly twice in total.
    std::vector<std::pair<int, int>> all = uses;
    if (rev != directed.end()) {
      all.insert(all.end(), rev->second.begin(), rev->second.end());
    }
    if (all.size() == 2) {
      neighbors_[all[0].first][all[0].second] = all[1].first;
      neighbors_[all[1].first][all[1].second] = all[0].first;
    }
  }
  bvh_ = std::make_shared<Bvh>(vertices_, faces_);
}

double TriangleMesh::windingNumber(const Vec3& p) const {
  double total = 0.0;
  for (const Face& f : faces_) {
    const Vec3 a = vertices_[f[0]] - p;
    const Vec3 b = vertices_[f[1]] - p;
    const Vec3 c = vertices_[f[2]] - p;
    const double la = a.norm();
    const double lb = b.norm();
    const double lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

bool TriangleMesh::contains(const Vec3& p) const {
  if (!watertight_) {
    throw Error(ErrorCode::NotWatertight, "containment query on an open mesh");
  }
  const double tol = 1e-12 * std::max(1.0, bounds_.extent().norm());
  if (!bounds_.contains(p, tol)) {
    return false;
  }
  if (closestPoint(p).distance <= tol) {
    return true;
  }
  return std::abs(windingNumber(p)) >= 0.5;
}

SurfacePoint TriangleMesh::closestPoint(const Vec3& p) const {
  SurfacePoint best;
  best.distance = std::numeric_limits<double>::infinity();
  if (faces_.empty()) {
    return best;
  }
  double bestSq = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Bvh::Node& node = bvh_->nodes[stack[--top]];
    if (node.box.squaredDistance(p) >= bestSq) {
      continue;
    }
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int fi = bvh_->order[i];
        const Face& f = faces_[fi];
        const Vec3 q = closestPointOnTriangle(p, vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]);
        const double d2 = (q - p).squaredNorm();
        if (d2 < bestSq || (d2 == bestSq && fi < best.face)) {
          bestSq = d2;
          best.point = q;
          best.face = fi;
        }
      }
      continue;
    }
    const double dl = bvh_->nodes[node.left].box.squaredDistance(p);
    const double dr = bvh_->nodes[node.right].box.squaredDistance(p);
    // Push the farther child first so the nearer one is visited first.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  best.distance = std::sqrt(bestSq);
  return best;
}

TriangleMesh TriangleMesh::scaled(double s) const {
  std::vector<Vec3> v = vertices_;
  for (Vec3& x : v) {
    x *= s;
  }
  return TriangleMesh(std::move(v), faces_);
}

std::vector<Vec3> TriangleMesh::samplePoints() const {
  std::vector<Vec3> out = vertices_;
  out.reserve(vertices_.size() + faces_.size());
  for (const Face& f : faces_) {
    out.push_back((vertices_[f[0]] + vertices_[f[1]] + vertices_[f[2]]) / 3.0);
  }
  return out;
}

bool contains(const TriangleMesh& mesh, const Vec3& p) {
  return mesh.contains(p);
}

SurfacePoint surfaceDistance(const TriangleMesh& mesh, const Vec3& p) {
  return mesh.closestPoint(p);
}

TriangleMesh makeBox(const Vec3& h) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Face> f = {
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh makeSphere(double radius, int rings, int segments) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  v.emplace_back(0.0, 0.0, radius);
  for (int r = 1; r < rings; ++r) {
    const double theta = std::numbers::pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      v.emplace_back(radius * std::sin(theta) * std::cos(phi), radius * std::sin(theta) * std::sin(phi),
                     radius * std::cos(theta));
    }
  }
  v.emplace_back(0.0, 0.0, -radius);
  const int south = static_cast<int>(v.size()) - 1;
  auto ring = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) {
    f.push_back({0, ring(1, s), ring(1, s + 1)});
  }
  for (int r = 1; r < rings - 1; ++r) {
    for (int s = 0; s < segments; ++s) {
      f.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
      f.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
    }
  }
  for (int s = 0; s < segments; ++s) {
    f.push_back({south, ring(rings - 1, s + 1), ring(rings - 1, s)});
  }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh loadObj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::vector<Vec3> v;
  std::vector<Face> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      v.push_back(p);
    } else if (key == "f") {
      std::vector<int> poly;
      std::string token;
      while (ls >> token) {
        int idx = std::stoi(token.substr(0, token.find('/')));
        idx = idx < 0 ? static_cast<int>(v.size()) + idx : idx - 1;
        poly.push_back(idx);
      }
      for (std::size_t k = 2; k < poly.size(); ++k) {
        faces.push_back({poly[0], poly[k - 1], poly[k]});
      }
    }
  }
  return TriangleMesh(std::move(v), std::move(faces));
}

TriangleMesh loadPly(const std::filesystem::path& path) {
  detail::PlyData data = detail::readPly(path);
  std::vector<Face> faces;
  for (const auto& poly : data.polygons) {
    for (std::size_t k = 2; k < poly.size(); ++k) {
      faces.push_back({poly[0], poly[k - 1], poly[k]});
    }
  }
  return TriangleMesh(std::move(data.vertices), std::move(faces));
}

TriangleMesh loadMesh(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingAsset, path.string());
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") {
    return loadObj(path);
  }
  if (ext == ".ply") {
    return loadPly(path);
  }
  throw Error(ErrorCode::InvalidArgument, "unsupported mesh extension " + ext);
}

void saveObj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out.precision(17);
  for (const Vec3& p : mesh.vertices()) {
    out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void savePlyBinary(const TriangleMesh& mesh, const std::filesystem::path& path) {
  detail::writePlyBinary(path, mesh.vertices(), mesh.faces());
}

}  // namespace hoi
