#pragma once

#include <utility>
#include <vector>

#include "floorloc/geom.hpp"

namespace floorloc {

/// One-to-one pixel matches between two frames plus the overlap ratio
/// 2*|pairs| / (valid_a + valid_b).
struct PixelCorrespondenceSet {
    int frame_a = 0;
    int frame_b = 0;
    std::vector<std::pair<PixelRef, PixelRef>> pairs;
    double ratio = 0.0;
};

/// Frustum-cropped, voxel-downsampled slice of a scene surface cloud.
struct FrustumChunk {
    int frame_id = -1;
    PointCloud points;  // one centroid per occupied voxel
    Vec3 box_min = Vec3::Zero();
    Vec3 box_max = Vec3::Zero();
    double resolution = 0.02;
};

/// Pixel-to-chunk-point associations for one frame.
struct PixelPointCorrespondenceSet {
    int frame_id = -1;
    std::vector<std::pair<PixelRef, int>> pairs;  // pixel, chunk point index
};

struct RgbdFrame {
    DepthImage depth;
    RigidPose3 pose;
};

struct MinedPair {
    int frame_a = 0;
    int frame_b = 0;
    double ratio = 0.0;
};

/// Mutual-nearest-neighbor matches between the world projections of two depth
/// images, accepted when the 3D distance is within `threshold` meters. Ties
/// break toward the smallest linear pixel index. Accelerated by a voxel hash
/// with cell size = threshold; results equal the all-pairs search.
PixelCorrespondenceSet find_correspondences(const DepthImage& Da, const DepthImage& Db,
                                            const CameraIntrinsics& K,
                                            const RigidPose3& Pa, const RigidPose3& Pb,
                                            double threshold = 0.02, int pixel_stride = 1);

/// All ordered frame pairs (subsampled at frame_stride) whose correspondence
/// ratio reaches min_ratio.
std::vector<MinedPair> mine_pairs(const std::vector<RgbdFrame>& sequence,
                                  const CameraIntrinsics& K, double min_ratio = 0.30,
                                  int frame_stride = 1, int pixel_stride = 4,
                                  double threshold = 0.02);

/// Points of S inside the axis-aligned bounding box of the frame's frustum
/// (depth range from D's valid min/max, fallback [0.1, 10]), voxel-downsampled
/// to `resolution` with one centroid per occupied voxel.
FrustumChunk crop_frustum_chunk(const PointCloud& S, const CameraIntrinsics& K,
                                const RigidPose3& pose, const DepthImage& D,
                                double resolution = 0.02);

/// Match each valid pixel's world projection to its nearest chunk point,
/// accepted within `threshold` meters.
PixelPointCorrespondenceSet associate_pixels_points(const DepthImage& D,
                                                    const CameraIntrinsics& K,
                                                    const RigidPose3& pose,
                                                    const FrustumChunk& chunk,
                                                    double threshold = 0.02,
                                                    int pixel_stride = 1);

/// One centroid per occupied voxel of size `resolution`, in first-visit order.
PointCloud voxel_downsample(const PointCloud& cloud, double resolution);

}  // namespace floorloc
