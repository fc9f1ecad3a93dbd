#include "floorloc/mining.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace floorloc {

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t v : {static_cast<std::uint64_t>(k.x),
                                static_cast<std::uint64_t>(k.y),
                                static_cast<std::uint64_t>(k.z)}) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

VoxelKey voxel_of(const Vec3& p, double cell) {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
            static_cast<std::int64_t>(std::floor(p.y() / cell)),
            static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

/// Uniform voxel hash over a fixed point set. With cell size equal to the
/// match threshold, every point within threshold of a query lies in the
/// 27-neighborhood of the query's voxel.
class VoxelIndex {
public:
    VoxelIndex(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell) {
        buckets_.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i)
            buckets_[voxel_of(points[i], cell)].push_back(static_cast<int>(i));
    }

    /// Nearest point to q among the 27 neighboring voxels; ties break toward
    /// the smallest index. Returns -1 when the neighborhood is empty.
    int nearest(const Vec3& q, double* dist_sq_out = nullptr) const {
        const VoxelKey base = voxel_of(q, cell_);
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::int64_t dz = -1; dz <= 1; ++dz)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    const auto it = buckets_.find({base.x + dx, base.y + dy, base.z + dz});
                    if (it == buckets_.end()) continue;
                    for (int idx : it->second) {
                        const double d2 = (points_[static_cast<std::size_t>(idx)] - q).squaredNorm();
                        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                            best_d2 = d2;
                            best = idx;
                        }
                    }
                }
        if (dist_sq_out) *dist_sq_out = best_d2;
        return best;
    }

private:
    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> buckets_;
};

struct ProjectedPixels {
    std::vector<Vec3> points;
    std::vector<PixelRef> pixels;
};

ProjectedPixels project_valid_pixels(const DepthImage& D, const CameraIntrinsics& K,
                                     const RigidPose3& pose, int stride) {
    ProjectedPixels out;
    for (int v = 0; v < D.height; v += stride)
        for (int u = 0; u < D.width; u += stride) {
            const double d = D.at(u, v);
            if (!(d > 0.0)) continue;
            out.points.push_back(to_world(
                Vec3{(u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d}, pose));
            out.pixels.push_back({u, v});
        }
    return out;
}

}  // namespace

PixelCorrespondenceSet find_correspondences(const DepthImage& Da, const DepthImage& Db,
                                            const CameraIntrinsics& K,
                                            const RigidPose3& Pa, const RigidPose3& Pb,
                                            double threshold, int pixel_stride) {
    if (!(threshold > 0.0)) throw InvalidRange("threshold must be positive");
    if (pixel_stride < 1) throw InvalidRange("pixel_stride must be >= 1");
    if (Da.width != K.width || Da.height != K.height || Db.width != K.width ||
        Db.height != K.height)
        throw IntrinsicsMismatch("depth image size does not match intrinsics");

    const ProjectedPixels a = project_valid_pixels(Da, K, Pa, pixel_stride);
    const ProjectedPixels b = project_valid_pixels(Db, K, Pb, pixel_stride);

    PixelCorrespondenceSet out;
    const int total_valid = static_cast<int>(a.points.size() + b.points.size());
    if (a.points.empty() || b.points.empty()) {
        out.ratio = 0.0;
        return out;
    }

    const VoxelIndex index_a(a.points, threshold);
    const VoxelIndex index_b(b.points, threshold);

    std::vector<int> nn_ab(a.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) nn_ab[i] = index_b.nearest(a.points[i]);
    std::vector<int> nn_ba(b.points.size());
    for (std::size_t j = 0; j < b.points.size(); ++j) nn_ba[j] = index_a.nearest(b.points[j]);

    const double thr_sq = threshold * threshold;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const int j = nn_ab[i];
        if (j < 0 || nn_ba[static_cast<std::size_t>(j)] != static_cast<int>(i)) continue;
        if ((a.points[i] - b.points[static_cast<std::size_t>(j)]).squaredNorm() > thr_sq)
            continue;
        out.pairs.emplace_back(a.pixels[i], b.pixels[static_cast<std::size_t>(j)]);
    }
    out.ratio = total_valid > 0 ? 2.0 * static_cast<double>(out.pairs.size()) / total_valid : 0.0;
    return out;
}

std::vector<MinedPair> mine_pairs(const std::vector<RgbdFrame>& sequence,
                                  const CameraIntrinsics& K, double min_ratio,
                                  int frame_stride, int pixel_stride, double threshold) {
    if (sequence.size() < 2) throw InvalidRange("need at least two frames");
    if (frame_stride < 1) throw InvalidRange("frame_stride must be >= 1");
    std::vector<int> kept;
    for (std::size_t i = 0; i < sequence.size(); i += static_cast<std::size_t>(frame_stride))
        kept.push_back(static_cast<int>(i));

    std::vector<MinedPair> out;
    for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = a + 1; b < kept.size(); ++b) {
            const int i = kept[a], j = kept[b];
            const auto set = find_correspondences(
                sequence[static_cast<std::size_t>(i)].depth,
                sequence[static_cast<std::size_t>(j)].depth, K,
                sequence[static_cast<std::size_t>(i)].pose,
                sequence[static_cast<std::size_t>(j)].pose, threshold, pixel_stride);
            if (set.ratio >= min_ratio) out.push_back({i, j, set.ratio});
        }
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double resolution) {
    if (!(resolution > 0.0)) throw InvalidRange("resolution must be positive");
    std::unordered_map<VoxelKey, int, VoxelKeyHash> slot;
    std::vector<Vec3> sums;
    std::vector<int> counts;
    slot.reserve(cloud.points.size());
    for (const Vec3& p : cloud.points) {
        const VoxelKey key = voxel_of(p, resolution);
        auto [it, inserted] = slot.try_emplace(key, static_cast<int>(sums.size()));
        if (inserted) {
            sums.push_back(p);
            counts.push_back(1);
        } else {
            sums[static_cast<std::size_t>(it->second)] += p;
            ++counts[static_cast<std::size_t>(it->second)];
        }
    }
    PointCloud out;
    out.points.reserve(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i)
        out.points.push_back(sums[i] / static_cast<double>(counts[i]));
    return out;
}

FrustumChunk crop_frustum_chunk(const PointCloud& S, const CameraIntrinsics& K,
                                const RigidPose3& pose, const DepthImage& D,
                                double resolution) {
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (double d : D.values) {
        if (!(d > 0.0)) continue;
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    if (!(d_max > 0.0)) {  // no valid depths
        d_min = 0.1;
        d_max = 10.0;
    }
    d_min = std::max(d_min, 1e-6);
    if (d_max <= d_min) d_max = d_min * (1.0 + 1e-9);

    const Frustum frustum = frustum_of(K, pose, d_min, d_max);
    const auto [lo, hi] = frustum.aabb();

    PointCloud inside;
    for (const Vec3& p : S.points) {
        if (p.x() < lo.x() || p.x() > hi.x() || p.y() < lo.y() || p.y() > hi.y() ||
            p.z() < lo.z() || p.z() > hi.z())
            continue;
        inside.points.push_back(p);
    }

    FrustumChunk chunk;
    chunk.points = voxel_downsample(inside, resolution);
    chunk.box_min = lo;
    chunk.box_max = hi;
    chunk.resolution = resolution;
    return chunk;
}

PixelPointCorrespondenceSet associate_pixels_points(const DepthImage& D,
                                                    const CameraIntrinsics& K,
                                                    const RigidPose3& pose,
                                                    const FrustumChunk& chunk,
                                                    double threshold, int pixel_stride) {
    if (!(threshold > 0.0)) throw InvalidRange("threshold must be positive");
    PixelPointCorrespondenceSet out;
    out.frame_id = chunk.frame_id;
    if (chunk.points.empty()) return out;

    const VoxelIndex index(chunk.points.points, threshold);
    const double thr_sq = threshold * threshold;
    for (int v = 0; v < D.height; v += pixel_stride)
        for (int u = 0; u < D.width; u += pixel_stride) {
            const double d = D.at(u, v);
            if (!(d > 0.0)) continue;
            const Vec3 p = to_world(Vec3{(u - K.cx) * d / K.fx, (v - K.cy) * d / K.fy, d}, pose);
            double d2 = 0.0;
            const int idx = index.nearest(p, &d2);
            if (idx >= 0 && d2 <= thr_sq) out.pairs.emplace_back(PixelRef{u, v}, idx);
        }
    return out;
}

}  // namespace floorloc
