#include "hoi/skeleton/skeleton.h"

namespace hoi {

namespace {

// Rest pose: T-pose, +y up, body facing +z, subject's left on +x. Arms point
// along +-x with palms down. Offsets are an approximation of the body-surface
// locations of each contact keypoint.
SkeletonModel buildHumanoid() {
  std::vector<Joint> j = {
      {"hip", -1, {0.0, 0.95, 0.0}, 0.0},
      {"lowerSpine", 0, {0.0, 0.10, 0.0}, 0.13},
      {"middleSpine", 1, {0.0, 0.12, 0.0}, 0.13},
      {"upperSpine", 2, {0.0, 0.12, 0.0}, 0.14},
      {"neck", 3, {0.0, 0.16, 0.0}, 0.06},
      {"head", 4, {0.0, 0.10, 0.0}, 0.05},
      {"leftShoulder", 3, {0.03, 0.12, 0.0}, 0.05},
      {"leftUpperArm", 6, {0.14, 0.0, 0.0}, 0.05},
      {"leftForeArm", 7, {0.28, 0.0, 0.0}, 0.045},
      {"leftHand", 8, {0.25, 0.0, 0.0}, 0.035},
      {"leftFingers", 9, {0.09, 0.0, 0.0}, 0.025},
      {"rightShoulder", 3, {-0.03, 0.12, 0.0}, 0.05},
      {"rightUpperArm", 11, {-0.14, 0.0, 0.0}, 0.05},
      {"rightForeArm", 12, {-0.28, 0.0, 0.0}, 0.045},
      {"rightHand", 13, {-0.25, 0.0, 0.0}, 0.035},
      {"rightFingers", 14, {-0.09, 0.0, 0.0}, 0.025},
      {"leftUpperLeg", 0, {0.09, -0.06, 0.0}, 0.07},
      {"leftLowerLeg", 16, {0.0, -0.40, 0.0}, 0.065},
      {"leftFoot", 17, {0.0, -0.41, 0.0}, 0.05},
      {"leftToeBase", 18, {0.0, -0.05, 0.13}, 0.035},
      {"rightUpperLeg", 0, {-0.09, -0.06, 0.0}, 0.07},
      {"rightLowerLeg", 20, {0.0, -0.40, 0.0}, 0.065},
      {"rightFoot", 21, {0.0, -0.41, 0.0}, 0.05},
      {"rightToeBase", 22, {0.0, -0.05, 0.13}, 0.035},
  };

  std::vector<Keypoint> k;
  auto add = [&](const std::string& part, const std::string& sub, int joint, Vec3 offset) {
    k.push_back({part + "/" + sub, joint, offset});
  };

  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;  // mirror along x
    const int fore = side == 0 ? 8 : 13;
    add(s + "ForeArm", "back", fore, {m * 0.125, 0.045, 0.0});
    add(s + "ForeArm", "pinky", fore, {m * 0.125, 0.0, -0.045});
    add(s + "ForeArm", "wrist", fore, {m * 0.22, -0.04, 0.0});
    add(s + "ForeArm", "thumb", fore, {m * 0.125, 0.0, 0.045});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;
    const int upper = side == 0 ? 7 : 12;
    add(s + "UpperArm", "up", upper, {m * 0.14, 0.05, 0.0});
    add(s + "UpperArm", "down", upper, {m * 0.14, -0.05, 0.0});
    add(s + "UpperArm", "back", upper, {m * 0.14, 0.0, -0.05});
    add(s + "UpperArm", "front", upper, {m * 0.14, 0.0, 0.05});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;
    const int shoulder = side == 0 ? 6 : 11;
    add(s + "Shoulder", "front", shoulder, {m * 0.12, 0.02, 0.06});
    add(s + "Shoulder", "back", shoulder, {m * 0.12, 0.02, -0.06});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;
    const int hand = side == 0 ? 9 : 14;
    const int fingers = side == 0 ? 10 : 15;
    add(s + "Hand", "back", hand, {m * 0.05, 0.03, 0.0});
    add(s + "Hand", "palm", hand, {m * 0.05, -0.03, 0.0});
    add(s + "Hand", "Thumb", hand, {m * 0.06, -0.01, 0.06});
    add(s + "Hand", "Index", fingers, {m * 0.07, -0.01, 0.03});
    add(s + "Hand", "Middle", fingers, {m * 0.08, -0.01, 0.01});
    add(s + "Hand", "Ring", fingers, {m * 0.07, -0.01, -0.01});
    add(s + "Hand", "Pinky", fingers, {m * 0.06, -0.01, -0.03});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;  // +x is outward for the left leg
    const int thigh = side == 0 ? 16 : 20;
    add(s + "UpperLeg", "inner", thigh, {-m * 0.07, -0.20, 0.0});
    add(s + "UpperLeg", "outer", thigh, {m * 0.07, -0.20, 0.0});
    add(s + "UpperLeg", "front", thigh, {0.0, -0.20, 0.07});
    add(s + "UpperLeg", "back", thigh, {0.0, -0.20, -0.07});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double m = side == 0 ? 1.0 : -1.0;
    const int shin = side == 0 ? 17 : 21;
    add(s + "LowerLeg", "front", shin, {0.0, -0.205, 0.055});
    add(s + "LowerLeg", "outer", shin, {m * 0.055, -0.205, 0.0});
    add(s + "LowerLeg", "back", shin, {0.0, -0.205, -0.055});
    add(s + "LowerLeg", "inner", shin, {-m * 0.055, -0.205, 0.0});
  }
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const int foot = side == 0 ? 18 : 22;
    const int toe = side == 0 ? 19 : 23;
    add(s + "Foot", "ToeBase", toe, {0.0, -0.01, 0.02});
    add(s + "Foot", "instep", foot, {0.0, -0.02, 0.07});
    add(s + "Foot", "sole", foot, {0.0, -0.075, 0.04});
  }
  add("upperSpine", "back", 3, {0.0, 0.08, -0.10});
  add("upperSpine", "right", 3, {-0.15, 0.08, 0.0});
  add("upperSpine", "front", 3, {0.0, 0.08, 0.10});
  add("upperSpine", "left", 3, {0.15, 0.08, 0.0});
  add("middleSpine", "front", 2, {0.0, 0.06, 0.10});
  add("middleSpine", "right", 2, {-0.14, 0.06, 0.0});
  add("middleSpine", "back", 2, {0.0, 0.06, -0.10});
  add("middleSpine", "left", 2, {0.14, 0.06, 0.0});
  add("leftNeck", "front", 4, {0.03, 0.05, 0.05});
  add("leftNeck", "back", 4, {0.03, 0.05, -0.05});
  add("rightNeck", "back", 4, {-0.03, 0.05, -0.05});
  add("rightNeck", "front", 4, {-0.03, 0.05, 0.05});
  // The published tree lists "front" twice under hip; the second entry sits
  // on the lower abdomen.
  add("hip", "front", 0, {0.0, 0.05, 0.11});
  add("hip", "left", 0, {0.15, 0.0, 0.0});
  add("hip", "front", 0, {0.0, -0.04, 0.11});
  add("hip", "back", 0, {0.0, 0.05, -0.11});
  add("buttocks_left", "buttocks_left", 0, {0.08, -0.05, -0.11});
  add("buttocks_right", "buttocks_right", 0, {-0.08, -0.05, -0.11});

  return SkeletonModel(std::move(j), std::move(k));
}

}  // namespace

const SkeletonModel& SkeletonModel::defaultHumanoid() {
  static const SkeletonModel model = buildHumanoid();
  return model;
}

}  // namespace hoi
