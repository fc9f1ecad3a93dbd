#pragma once

#include <cmath>
#include <vector>

#include <functional>

#include "floorloc/filter.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/geom.hpp"
#include "floorloc/rng.hpp"

namespace floorloc::testutil {

inline Mat3 random_rotation(Rng& rng) {
    Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
    while (axis.norm() < 1e-6) axis = Vec3{rng.normal(), rng.normal(), rng.normal()};
    axis.normalize();
    return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis).toRotationMatrix();
}

inline RigidPose3 random_pose(Rng& rng, double translation_scale = 2.0) {
    RigidPose3 p;
    p.rotation = random_rotation(rng);
    p.translation = Vec3{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                         rng.uniform(-1.0, 1.0)} * translation_scale;
    return p;
}

/// Square room: free interior, one-cell boundary walls.
inline OccupancyGrid box_room(int cells, double resolution, double ox = 0.0, double oy = 0.0) {
    OccupancyGrid grid(cells, cells, resolution, Cell::Free, ox, oy);
    for (int x = 0; x < cells; ++x) {
        grid.at(x, 0) = Cell::Occupied;
        grid.at(x, cells - 1) = Cell::Occupied;
    }
    for (int y = 0; y < cells; ++y) {
        grid.at(0, y) = Cell::Occupied;
        grid.at(cells - 1, y) = Cell::Occupied;
    }
    return grid;
}

/// Exact raycast oracle via global boundary crossings: collect every t where
/// the ray crosses a gridline, classify each interval by its midpoint cell,
/// and return the entry distance of the first blocking cell. Independent of
/// the incremental traversal in the library.
inline double raycast_crossing_oracle(const OccupancyGrid& grid, double ox, double oy,
                                      double angle, double max_range,
                                      bool unknown_blocks = true) {
    const double res = grid.resolution;
    const double gx = (ox - grid.origin_x) / res, gy = (oy - grid.origin_y) / res;
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double range_cells = max_range / res;

    std::vector<double> ts{0.0, range_cells};
    auto add_crossings = [&](double g, double d, int count) {
        if (d == 0.0) return;
        for (int k = 0; k <= count; ++k) {
            const double t = (k - g) / d;
            if (t > 0.0 && t < range_cells) ts.push_back(t);
        }
    };
    add_crossings(gx, dx, grid.width);
    add_crossings(gy, dy, grid.height);
    std::sort(ts.begin(), ts.end());

    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] - ts[i] < 1e-12) continue;  // grazed corner
        const double tm = 0.5 * (ts[i] + ts[i + 1]);
        const int cx = static_cast<int>(std::floor(gx + tm * dx));
        const int cy = static_cast<int>(std::floor(gy + tm * dy));
        if (!grid.in_bounds(cx, cy)) return max_range;
        if (i > 0 && grid.blocks(cx, cy, unknown_blocks))
            return std::min(ts[i] * res, max_range);
    }
    return max_range;
}


/// Scorer wrapping a plain function of the hypothesis indices.
class FunctionScorer : public Scorer {
public:
    explicit FunctionScorer(std::function<double(int, int, int)> fn) : fn_(std::move(fn)) {}
    double score(int cx, int cy, int b, const Pose2&) override { return fn_(cx, cy, b); }

private:
    std::function<double(int, int, int)> fn_;
};

inline std::vector<double> gauss_kernel_oracle(double sigma) {
    if (!(sigma > 0.0)) return {1.0};
    const int hw = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * hw + 1));
    double sum = 0.0;
    for (int i = -hw; i <= hw; ++i) {
        k[static_cast<std::size_t>(i + hw)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[static_cast<std::size_t>(i + hw)];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Dense scatter enumeration over every (source hypothesis, destination
// hypothesis) transition, followed by a pointwise measurement update.
// Independent of the separable implementation in the library.
inline PosteriorGrid bayes_enumeration_oracle(const PosteriorGrid& prior, const MotionDelta& delta,
                                       const std::function<double(int, int, int)>& score) {
    const int W = prior.width, H = prior.height, O = prior.bins;
    PosteriorGrid out = prior;
    std::fill(out.probs.begin(), out.probs.end(), 0.0);

    const auto kt = gauss_kernel_oracle(delta.sigma_trans / prior.resolution);
    const int thw = static_cast<int>(kt.size() / 2);
    const double bin_width = 2.0 * M_PI / O;
    const auto kr = gauss_kernel_oracle(delta.sigma_rot / bin_width);
    const int rhw = static_cast<int>(kr.size() / 2);
    const double shift = delta.dphi / bin_width;
    const int s0 = static_cast<int>(std::floor(shift));
    const double f = shift - std::floor(shift);
    auto mod = [O](int b) { return ((b % O) + O) % O; };

    for (int cy = 0; cy < H; ++cy)
        for (int cx = 0; cx < W; ++cx)
            for (int b = 0; b < O; ++b) {
                const double m = prior.at(cx, cy, b);
                if (m == 0.0) continue;
                const double theta = prior.bin_center(b);
                const double sx = (std::cos(theta) * delta.dx - std::sin(theta) * delta.dy) /
                                  prior.resolution;
                const double sy = (std::sin(theta) * delta.dx + std::cos(theta) * delta.dy) /
                                  prior.resolution;
                const int ix = static_cast<int>(std::floor(sx));
                const int iy = static_cast<int>(std::floor(sy));
                const double ax = sx - std::floor(sx), ay = sy - std::floor(sy);
                const double corners[4][3] = {
                    {static_cast<double>(cx + ix), static_cast<double>(cy + iy),
                     (1 - ax) * (1 - ay)},
                    {static_cast<double>(cx + ix + 1), static_cast<double>(cy + iy), ax * (1 - ay)},
                    {static_cast<double>(cx + ix), static_cast<double>(cy + iy + 1), (1 - ax) * ay},
                    {static_cast<double>(cx + ix + 1), static_cast<double>(cy + iy + 1), ax * ay}};

                // orientation weights for this source bin
                std::vector<double> rot(static_cast<std::size_t>(O), 0.0);
                for (int split = 0; split < 2; ++split) {
                    const int tb = split == 0 ? b + s0 : b + s0 + 1;
                    const double wb = split == 0 ? 1.0 - f : f;
                    if (wb == 0.0) continue;
                    for (int k = -rhw; k <= rhw; ++k)
                        rot[static_cast<std::size_t>(mod(tb + k))] +=
                            wb * kr[static_cast<std::size_t>(k + rhw)];
                }

                for (const auto& corner : corners) {
                    if (corner[2] == 0.0) continue;
                    // translation happens first: mass landing off the map is
                    // gone before the diffusion kernel is applied
                    if (corner[0] < 0 || corner[0] >= W || corner[1] < 0 || corner[1] >= H)
                        continue;
                    for (int kx = -thw; kx <= thw; ++kx)
                        for (int ky = -thw; ky <= thw; ++ky) {
                            const int tx = static_cast<int>(corner[0]) + kx;
                            const int ty = static_cast<int>(corner[1]) + ky;
                            if (tx < 0 || tx >= W || ty < 0 || ty >= H) continue;
                            const double w2d = corner[2] * kt[static_cast<std::size_t>(kx + thw)] *
                                               kt[static_cast<std::size_t>(ky + thw)];
                            for (int tb = 0; tb < O; ++tb) {
                                const double w = w2d * rot[static_cast<std::size_t>(tb)];
                                if (w != 0.0) out.at(tx, ty, tb) += m * w;
                            }
                        }
                }
            }

    for (int cy = 0; cy < H; ++cy)
        for (int cx = 0; cx < W; ++cx)
            if (out.cell_blocked(cx, cy))
                for (int b = 0; b < O; ++b) out.at(cx, cy, b) = 0.0;
    double total = out.total_mass();
    for (double& p : out.probs) p /= total;

    for (int cy = 0; cy < H; ++cy)
        for (int cx = 0; cx < W; ++cx)
            for (int b = 0; b < O; ++b) out.at(cx, cy, b) *= score(cx, cy, b);
    total = out.total_mass();
    for (double& p : out.probs) p /= total;
    return out;
}

}  // namespace floorloc::testutil
