#include "floorloc/geom.hpp"

#include <cmath>

namespace floorloc {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw InvalidIntrinsics("focal lengths must be positive");
    if (width < 1 || height < 1)
        throw InvalidIntrinsics("image size must be at least 1x1");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw InvalidIntrinsics("principal point outside image");
}

void RigidPose3::validate(double tol) const {
    const Mat3 gram = rotation.transpose() * rotation;
    if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
        throw InvalidRotation("R'R deviates from identity");
    if (std::abs(rotation.determinant() - 1.0) > tol)
        throw InvalidRotation("det(R) != 1");
    if (!translation.allFinite()) throw InvalidRotation("non-finite translation");
}

int DepthImage::count_valid(int stride) const {
    int n = 0;
    for (int v = 0; v < height; v += stride)
        for (int u = 0; u < width; u += stride)
            if (valid(u, v)) ++n;
    return n;
}

Vec3 unproject(double u, double v, double d, const CameraIntrinsics& K) {
    if (!(d > 0.0)) throw InvalidDepth("depth must be positive");
    if (u < 0.0 || u >= K.width || v < 0.0 || v >= K.height)
        throw OutOfBounds("pixel outside image");
    return {(u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d};
}

Vec3 project(const Vec3& p_cam, const CameraIntrinsics& K) {
    return {K.fx * p_cam.x() / p_cam.z() + K.cx,
            K.fy * p_cam.y() / p_cam.z() + K.cy, p_cam.z()};
}

Vec3 to_world(const Vec3& p_cam, const RigidPose3& pose) {
    return pose.rotation * p_cam + pose.translation;
}

Vec3 to_camera(const Vec3& p_world, const RigidPose3& pose) {
    return pose.rotation.transpose() * (p_world - pose.translation);
}

PointCloud depth_to_cloud(const DepthImage& D, const CameraIntrinsics& K,
                          const RigidPose3& pose, int stride) {
    if (stride < 1) throw InvalidRange("stride must be >= 1");
    PointCloud cloud;
    for (int v = 0; v < D.height; v += stride) {
        for (int u = 0; u < D.width; u += stride) {
            const double d = D.at(u, v);
            if (!(d > 0.0)) continue;
            const Vec3 p_cam{(u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d};
            cloud.points.push_back(to_world(p_cam, pose));
            cloud.sources.push_back({u, v});
        }
    }
    return cloud;
}

namespace {

// Unchecked back-projection used for frustum corners, where the image
// rectangle boundary (u == width, v == height) is a legal coordinate.
Vec3 unproject_unchecked(double u, double v, double d, const CameraIntrinsics& K) {
    return {(u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d};
}

}  // namespace

Frustum frustum_of(const CameraIntrinsics& K, const RigidPose3& pose,
                   double d_min, double d_max) {
    if (!(d_min > 0.0) || !(d_min < d_max))
        throw InvalidRange("need 0 < d_min < d_max");
    Frustum f;
    f.d_min = d_min;
    f.d_max = d_max;
    f.intrinsics = K;
    f.pose = pose;
    const double w = K.width, h = K.height;
    const std::array<std::pair<double, double>, 4> rect = {
        {{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}}};
    for (int i = 0; i < 4; ++i) {
        f.corners[i] = to_world(unproject_unchecked(rect[i].first, rect[i].second, d_min, K), pose);
        f.corners[i + 4] =
            to_world(unproject_unchecked(rect[i].first, rect[i].second, d_max, K), pose);
    }
    return f;
}

bool Frustum::contains(const Vec3& world_point) const {
    const Vec3 p = to_camera(world_point, pose);
    const double z = p.z();
    // Near/far planes.
    if (z < d_min || z > d_max) return false;
    // Side planes as homogeneous half-spaces: 0 <= u <= width etc., with
    // u*z = fx*x + cx*z (z > 0 inside the near/far slab).
    const double uz = intrinsics.fx * p.x() + intrinsics.cx * z;
    const double vz = intrinsics.fy * p.y() + intrinsics.cy * z;
    return uz >= 0.0 && uz <= intrinsics.width * z && vz >= 0.0 &&
           vz <= intrinsics.height * z;
}

std::pair<Vec3, Vec3> Frustum::aabb() const {
    Vec3 lo = corners[0], hi = corners[0];
    for (const Vec3& c : corners) {
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    return {lo, hi};
}

}  // namespace floorloc
