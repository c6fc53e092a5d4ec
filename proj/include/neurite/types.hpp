#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace neurite {

using index_t = std::int64_t;

template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Vec3d = Eigen::Vector3d;
using Vec3i = Eigen::Matrix<index_t, 3, 1>;

// Axis-aligned box in micrometers, component order (x, y, z).
struct Box3 {
  Vec3d lo = Vec3d::Zero();
  Vec3d hi = Vec3d::Zero();

  bool degenerate() const {
    return (hi.array() <= lo.array()).any();
  }
};

}  // namespace neurite
