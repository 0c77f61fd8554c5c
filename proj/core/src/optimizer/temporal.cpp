#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "hoi/common/error.h"
#include "hoi/optimizer/optimizer.h"

namespace hoi {

namespace {

constexpr int kMinSmoothFrames = 7;
constexpr int kMaxPad = 9;

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butterworthLowPass(double cutoffHz, double fps) {
  const double k = std::tan(std::numbers::pi * cutoffHz / fps);
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
  Biquad f;
  f.b0 = k * k * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k * k - 1.0) * norm;
  f.a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;
  return f;
}

// Direct form II transposed, started in the steady state for x[0].
std::vector<double> filterForward(const Biquad& f, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  double z0 = (f.b1 - f.a1 + f.b2 - f.a2) * x.front();
  double z1 = (f.b2 - f.a2) * x.front();
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f.b0 * x[i] + z0;
    z0 = f.b1 * x[i] - f.a1 * y[i] + z1;
    z1 = f.b2 * x[i] - f.a2 * y[i];
  }
  return y;
}

std::vector<double> reversed(std::vector<double> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

// Forward then backward pass over the odd-reflection padded signal.
std::vector<double> forwardBackward(const Biquad& f, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int pad = std::min(kMaxPad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (int i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (int i = n - 2; i >= n - 1 - pad; --i) ext.push_back(2.0 * x.back() - x[i]);
  const std::vector<double> y = reversed(filterForward(f, reversed(filterForward(f, ext))));
  return {y.begin() + pad, y.begin() + pad + n};
}

Quat chordalMean(const std::vector<Quat>& qs) {
  Mat3 sum = Mat3::Zero();
  for (const Quat& q : qs) sum += q.toRotationMatrix();
  Eigen::JacobiSVD<Mat3> svd(sum, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Quat(svd.matrixU() * d * svd.matrixV().transpose()).normalized();
}

// Rotation vectors relative to the chordal mean, unwrapped so consecutive
// frames stay close.
std::vector<Vec3> unwrappedLogs(const Quat& mean, const std::vector<Quat>& qs) {
  std::vector<Vec3> out;
  for (const Quat& q : qs) {
    Vec3 r = logMap(mean.conjugate() * q);
    if (!out.empty() && r.norm() > 0.0) {
      Vec3 best = r;
      for (double turns : {-1.0, 1.0}) {
        const Vec3 alt = r + turns * 2.0 * std::numbers::pi * r.normalized();
        if ((alt - out.back()).norm() < (best - out.back()).norm()) best = alt;
      }
      r = best;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<Vec3> smoothVectors(const std::vector<Vec3>& v, double cutoffHz, double fps) {
  std::vector<Vec3> out(v.size());
  for (int c = 0; c < 3; ++c) {
    std::vector<double> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s[i] = v[i][c];
    s = lowPassZeroPhase(s, cutoffHz, fps);
    for (std::size_t i = 0; i < v.size(); ++i) out[i][c] = s[i];
  }
  return out;
}

std::vector<Quat> smoothRotations(const std::vector<Quat>& qs, double cutoffHz, double fps) {
  const Quat mean = chordalMean(qs);
  const std::vector<Vec3> logs = smoothVectors(unwrappedLogs(mean, qs), cutoffHz, fps);
  std::vector<Quat> out;
  for (const Vec3& r : logs) out.push_back((mean * expMap(r)).normalized());
  return out;
}

}  // namespace

std::vector<FrameState> interpolateFrames(const FrameState& a, const FrameState& b, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "interpolation factor must be at least 1");
  if (a.human.rotations.size() != b.human.rotations.size()) {
    throw Error(ErrorCode::DimensionMismatch, "keyframes have different joint counts");
  }
  std::vector<FrameState> out;
  for (int i = 1; i < k; ++i) {
    const double t = static_cast<double>(i) / k;
    FrameState s = a;
    for (std::size_t j = 0; j < a.human.rotations.size(); ++j) {
      s.human.rotations[j] = slerp(a.human.rotations[j], b.human.rotations[j], t);
    }
    s.human.rootTranslation = (1.0 - t) * a.human.rootTranslation + t * b.human.rootTranslation;
    s.object = RigidPose(slerp(a.object.rotation(), b.object.rotation(), t),
                         (1.0 - t) * a.object.translation() + t * b.object.translation(), a.object.scale());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> lowPassZeroPhase(const std::vector<double>& signal, double cutoffHz, double fps) {
  if (!(fps > 0.0) || !(cutoffHz > 0.0) || !(cutoffHz < 0.5 * fps)) {
    throw Error(ErrorCode::InvalidArgument, "cutoff must lie in (0, fps / 2)");
  }
  if (static_cast<int>(signal.size()) < kMinSmoothFrames) return signal;
  const Biquad f = butterworthLowPass(cutoffHz, fps);
  const std::vector<double> fb = forwardBackward(f, signal);
  const std::vector<double> bf = reversed(forwardBackward(f, reversed(signal)));
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (fb[i] + bf[i]);
  return out;
}

SmoothResult smoothSequence(const std::vector<FrameState>& states, double cutoffHz, double fps,
                            const SmoothChannels& channels) {
  lowPassZeroPhase({}, cutoffHz, fps);
  SmoothResult result;
  result.states = states;
  const int n = static_cast<int>(states.size());
  if (n < kMinSmoothFrames) {
    result.warnings.push_back("sequence has " + std::to_string(n) + " frames; smoothing needs at least " +
                              std::to_string(kMinSmoothFrames) + " and was skipped");
    return result;
  }
  const std::size_t numJoints = states.front().human.rotations.size();
  for (const FrameState& s : states) {
    if (s.human.rotations.size() != numJoints) {
      throw Error(ErrorCode::DimensionMismatch, "frames have different joint counts");
    }
  }

  if (channels.object) {
    std::vector<Quat> rot;
    std::vector<Vec3> trans;
    for (const FrameState& s : states) {
      rot.push_back(s.object.rotation());
      trans.push_back(s.object.translation());
    }
    rot = smoothRotations(rot, cutoffHz, fps);
    trans = smoothVectors(trans, cutoffHz, fps);
    for (int i = 0; i < n; ++i) {
      result.states[i].object = RigidPose(rot[i], trans[i], states[i].object.scale());
    }
  }
  if (channels.rootTranslation) {
    std::vector<Vec3> trans;
    for (const FrameState& s : states) trans.push_back(s.human.rootTranslation);
    trans = smoothVectors(trans, cutoffHz, fps);
    for (int i = 0; i < n; ++i) result.states[i].human.rootTranslation = trans[i];
  }
  for (std::size_t j = 0; j < numJoints; ++j) {
    if (!channels.allJoints && !channels.joints.count(static_cast<int>(j))) continue;
    std::vector<Quat> rot;
    for (const FrameState& s : states) rot.push_back(s.human.rotations[j]);
    rot = smoothRotations(rot, cutoffHz, fps);
    for (int i = 0; i < n; ++i) result.states[i].human.rotations[j] = rot[i];
  }
  return result;
}

}  // namespace hoi
