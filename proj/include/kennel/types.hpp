#pragma once

#include <array>
#include <cstdint>

#include "kennel/quat.hpp"

namespace kennel {

/// Four limbs, tail, body.
inline constexpr int kJoints = 6;

using JointPoses = std::array<quat::UnitQuaternion, kJoints>;

/// One discrete action class per joint.
using ActionLabel = std::array<int, kJoints>;

}  // namespace kennel
