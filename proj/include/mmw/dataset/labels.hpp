#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

namespace mmw {

enum class Distance : int { D10 = 0, D20, D30, D40, D50 };
enum class Angle : int { A0 = 0, A45, A90, A180 };

inline constexpr std::size_t kDistanceCount = 5;
inline constexpr std::size_t kAngleCount = 4;
inline constexpr std::size_t kJointCount = kDistanceCount * kAngleCount;

inline constexpr std::array<int, kDistanceCount> kDistanceFeet = {10, 20, 30, 40, 50};
inline constexpr std::array<int, kAngleCount> kAngleDegrees = {0, 45, 90, 180};

inline constexpr int feet(Distance d) { return kDistanceFeet[static_cast<std::size_t>(d)]; }
inline constexpr int degrees(Angle a) { return kAngleDegrees[static_cast<std::size_t>(a)]; }

inline std::optional<Distance> distance_from_feet(int ft) {
  for (std::size_t i = 0; i < kDistanceCount; ++i) {
    if (kDistanceFeet[i] == ft) return static_cast<Distance>(i);
  }
  return std::nullopt;
}

inline std::optional<Angle> angle_from_degrees(int deg) {
  for (std::size_t i = 0; i < kAngleCount; ++i) {
    if (kAngleDegrees[i] == deg) return static_cast<Angle>(i);
  }
  return std::nullopt;
}

/// Transmitter-receiver geometry: one of 5 distances x 4 incidence angles.
struct ClassLabel {
  Distance distance = Distance::D10;
  Angle angle = Angle::A0;

  std::size_t distance_index() const { return static_cast<std::size_t>(distance); }
  std::size_t angle_index() const { return static_cast<std::size_t>(angle); }
  /// Row-major joint index: distance * 4 + angle.
  std::size_t joint_index() const { return distance_index() * kAngleCount + angle_index(); }

  static ClassLabel from_joint(std::size_t joint) {
    return {static_cast<Distance>(joint / kAngleCount), static_cast<Angle>(joint % kAngleCount)};
  }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

inline std::string distance_name(std::size_t i) { return std::to_string(kDistanceFeet[i]) + "ft"; }
inline std::string angle_name(std::size_t i) { return std::to_string(kAngleDegrees[i]) + "deg"; }
inline std::string joint_name(std::size_t j) {
  return distance_name(j / kAngleCount) + "/" + angle_name(j % kAngleCount);
}

/// Which label component a classifier predicts.
enum class Target { Distance, Angle, Joint };

inline std::size_t class_count(Target t) {
  switch (t) {
    case Target::Distance: return kDistanceCount;
    case Target::Angle: return kAngleCount;
    case Target::Joint: return kJointCount;
  }
  return 0;
}

inline std::size_t class_of(const ClassLabel& l, Target t) {
  switch (t) {
    case Target::Distance: return l.distance_index();
    case Target::Angle: return l.angle_index();
    case Target::Joint: return l.joint_index();
  }
  return 0;
}

inline std::string class_name(Target t, std::size_t i) {
  switch (t) {
    case Target::Distance: return distance_name(i);
    case Target::Angle: return angle_name(i);
    case Target::Joint: return joint_name(i);
  }
  return {};
}

inline std::string to_string(Target t) {
  switch (t) {
    case Target::Distance: return "distance";
    case Target::Angle: return "angle";
    case Target::Joint: return "joint";
  }
  return {};
}

inline std::optional<Target> target_from_string(const std::string& s) {
  if (s == "distance") return Target::Distance;
  if (s == "angle") return Target::Angle;
  if (s == "joint") return Target::Joint;
  return std::nullopt;
}

}  // namespace mmw
