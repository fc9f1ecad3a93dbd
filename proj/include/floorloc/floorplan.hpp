#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "floorloc/error.hpp"

namespace floorloc {

/// Wrap an angle to [-pi, pi).
inline double wrap_angle(double a) {
    double w = a - 2.0 * M_PI * std::floor((a + M_PI) / (2.0 * M_PI));
    if (w >= M_PI) w -= 2.0 * M_PI;  // guard against rounding at the seam
    return w;
}

/// SE(2) pose: planar position in meters plus heading in radians.
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;

    Pose2 normalized() const { return {x, y, wrap_angle(phi)}; }
};

/// pose_prev (+) delta, with (dx, dy) expressed in the previous pose frame.
Pose2 compose(const Pose2& pose, double dx, double dy, double dphi);

/// Relative transform taking `from` to `to`, in `from`'s frame.
struct Delta2 {
    double dx, dy, dphi;
};
Delta2 relative(const Pose2& from, const Pose2& to);

enum class Cell : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

/// Raster floorplan. Cell (cx, cy) covers the half-open world square
/// [origin + res*cell, origin + res*(cell+1)); cy grows with world y.
struct OccupancyGrid {
    int width = 0;
    int height = 0;
    double resolution = 0.1;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<Cell> cells;

    OccupancyGrid() = default;
    OccupancyGrid(int w, int h, double res, Cell fill = Cell::Free,
                  double ox = 0.0, double oy = 0.0)
        : width(w), height(h), resolution(res), origin_x(ox), origin_y(oy),
          cells(static_cast<std::size_t>(w) * h, fill) {}

    int cell_index(int cx, int cy) const { return cy * width + cx; }
    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width && cy >= 0 && cy < height;
    }
    Cell at(int cx, int cy) const { return cells[cell_index(cx, cy)]; }
    Cell& at(int cx, int cy) { return cells[cell_index(cx, cy)]; }

    bool blocks(int cx, int cy, bool unknown_blocks = true) const {
        const Cell c = at(cx, cy);
        return c == Cell::Occupied || (unknown_blocks && c == Cell::Unknown);
    }

    std::pair<int, int> world_to_cell(double x, double y) const {
        return {static_cast<int>(std::floor((x - origin_x) / resolution)),
                static_cast<int>(std::floor((y - origin_y) / resolution))};
    }
    double cell_center_x(int cx) const { return origin_x + (cx + 0.5) * resolution; }
    double cell_center_y(int cy) const { return origin_y + (cy + 0.5) * resolution; }

    void validate() const;
};

/// Equiangular depth scan at a pose. Angles are camera-relative, strictly
/// increasing, and span `fov` symmetrically about zero.
struct RayScan {
    double fov = 0.0;
    std::vector<double> angles;
    std::vector<double> depths;

    int size() const { return static_cast<int>(depths.size()); }
    void validate() const;
};

/// Shared ray-angle convention: v angles spanning fov symmetrically about 0.
/// Endpoint-inclusive spacing fov/(v-1); a full circle (fov = 2*pi) uses
/// periodic spacing fov/v so that e.g. 72 rays sit 5 degrees apart.
std::vector<double> scan_angles(int v, double fov);

/// Distance from (ox, oy) along `angle` to the first blocking cell boundary,
/// or max_range if none is hit before the ray leaves the grid or range.
/// A ray starting exactly on a cell boundary belongs to the cell in its
/// direction of travel. Unknown cells block unless unknown_blocks is false.
double raycast(const OccupancyGrid& grid, double ox, double oy, double angle,
               double max_range, bool unknown_blocks = true);

/// Render an equiangular scan of `v` rays over `fov` at `pose`.
RayScan render_scan(const OccupancyGrid& grid, const Pose2& pose, int v,
                    double fov, double max_range, bool unknown_blocks = true);

/// Row-major linear indices of all Free cells.
std::vector<int> free_poses(const OccupancyGrid& grid);

}  // namespace floorloc
