#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "floorloc/error.hpp"

namespace floorloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera intrinsics. Pixel coordinates are continuous; the image
/// rectangle spans [0, width) x [0, height).
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    void validate() const;
    bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid camera-to-world transform: p_world = R * p_cam + T.
struct RigidPose3 {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    /// Throws InvalidRotation unless R'R = I and det(R) = 1 within tol.
    void validate(double tol = 1e-9) const;
};

/// Per-pixel depth in meters, row-major; 0 marks an invalid pixel.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    DepthImage() = default;
    DepthImage(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
    double& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
    bool valid(int u, int v) const { return at(u, v) > 0.0; }
    int count_valid(int stride = 1) const;
};

/// Pixel that produced a point (for clouds projected from depth images).
struct PixelRef {
    int u = 0;
    int v = 0;
    bool operator==(const PixelRef&) const = default;
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<PixelRef> sources;  // empty, or one entry per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// View frustum between depths d_min and d_max, in world coordinates.
struct Frustum {
    std::array<Vec3, 8> corners;  // 4 near then 4 far, image-corner order
    double d_min = 0.0;
    double d_max = 0.0;
    CameraIntrinsics intrinsics;
    RigidPose3 pose;

    /// Exact test against the six frustum planes (expressed in camera frame).
    bool contains(const Vec3& world_point) const;
    /// Axis-aligned bounding box of the eight corners.
    std::pair<Vec3, Vec3> aabb() const;
};

/// Back-project pixel (u, v) at depth d into the camera frame.
/// Throws InvalidDepth for d <= 0 and OutOfBounds for pixels outside the image.
Vec3 unproject(double u, double v, double d, const CameraIntrinsics& K);

/// Forward projection of a camera-frame point; returns (u, v, depth).
Vec3 project(const Vec3& p_cam, const CameraIntrinsics& K);

/// Camera frame -> world frame.
Vec3 to_world(const Vec3& p_cam, const RigidPose3& pose);

/// World frame -> camera frame.
Vec3 to_camera(const Vec3& p_world, const RigidPose3& pose);

/// Project every valid pixel (sampled at `stride`) into a world-frame cloud.
PointCloud depth_to_cloud(const DepthImage& D, const CameraIntrinsics& K,
                          const RigidPose3& pose, int stride = 1);

/// Frustum spanned by the image rectangle between d_min and d_max.
/// Throws InvalidRange unless 0 < d_min < d_max.
Frustum frustum_of(const CameraIntrinsics& K, const RigidPose3& pose,
                   double d_min, double d_max);

}  // namespace floorloc
