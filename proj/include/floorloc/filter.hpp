#pragma once

#include <functional>
#include <span>
#include <vector>

#include "floorloc/floorplan.hpp"

namespace floorloc {

/// Histogram-filter belief over (cell x, cell y, orientation bin) hypotheses.
/// Hypotheses sit at cell centers; orientation bin b is centered at
/// -pi + b * 2*pi / bins. Storage is cell-major with the bin axis fastest,
/// so the linear hypothesis index is (cy * width + cx) * bins + b.
struct PosteriorGrid {
    int width = 0;
    int height = 0;
    int bins = 0;
    double resolution = 0.1;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<std::uint8_t> blocked;  // per cell, 1 = Occupied/Unknown
    std::vector<double> probs;          // width*height*bins

    std::size_t index(int cx, int cy, int b) const {
        return (static_cast<std::size_t>(cy) * width + cx) * bins + b;
    }
    double at(int cx, int cy, int b) const { return probs[index(cx, cy, b)]; }
    double& at(int cx, int cy, int b) { return probs[index(cx, cy, b)]; }
    bool cell_blocked(int cx, int cy) const {
        return blocked[static_cast<std::size_t>(cy) * width + cx] != 0;
    }

    double bin_center(int b) const { return -M_PI + b * (2.0 * M_PI / bins); }
    Pose2 hypothesis_pose(int cx, int cy, int b) const {
        return {origin_x + (cx + 0.5) * resolution, origin_y + (cy + 0.5) * resolution,
                bin_center(b)};
    }

    double total_mass() const;
    double entropy() const;  // natural log
    /// Entries >= 0, total within 1e-9 of 1, blocked cells exactly 0.
    void validate() const;
};

struct LikelihoodParams {
    double lambda_depth = 3.0;  // 1/m weight on the mean-L1 term
    double lambda_shape = 1.0;  // weight on the 1 - cosine term
    double epsilon = 1e-8;
};

/// exp(-lambda_d * meanL1) * exp(-lambda_s * (1 - cos)) in (0, 1].
double likelihood(const RayScan& obs, const RayScan& map_scan, double lambda_depth,
                  double lambda_shape, double epsilon = 1e-8);

/// Lazily rendered, memoized map scans for every (cell, bin) hypothesis of a
/// grid. Rendering a hypothesis twice returns bit-identical depths.
class HypothesisScans {
public:
    HypothesisScans(const OccupancyGrid& grid, int bins, int v, double fov,
                    double max_range, bool unknown_blocks = true);

    std::span<const double> depths(int cx, int cy, int b);
    const std::vector<double>& angles() const { return angles_; }
    int bins() const { return bins_; }
    int rays() const { return v_; }
    double fov() const { return fov_; }
    double max_range() const { return max_range_; }
    const OccupancyGrid& grid() const { return *grid_; }

private:
    const OccupancyGrid* grid_;
    int bins_, v_;
    double fov_, max_range_;
    bool unknown_blocks_;
    std::vector<double> angles_;
    std::vector<double> store_;
    std::vector<std::uint8_t> rendered_;
};

/// Observation scorer for one measurement update.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(int cx, int cy, int b, const Pose2& hypothesis) = 0;
};

/// Scores hypotheses by ray-scan similarity against a fixed observation.
class RayMatchScorer : public Scorer {
public:
    RayMatchScorer(HypothesisScans& scans, const RayScan& obs,
                   const LikelihoodParams& params = {});
    double score(int cx, int cy, int b, const Pose2& hypothesis) override;

private:
    HypothesisScans* scans_;
    const RayScan* obs_;
    LikelihoodParams params_;
};

struct SingleFrameResult {
    Pose2 best;
    PosteriorGrid scores;  // normalized to total mass 1
};

/// Exhaustively score every Free-cell/orientation hypothesis against `obs`.
/// Ties break toward the lowest linear hypothesis index.
SingleFrameResult single_frame_localize(const OccupancyGrid& grid, const RayScan& obs,
                                        int bins, const LikelihoodParams& params = {},
                                        double max_range = 10.0,
                                        HypothesisScans* cache = nullptr);

/// Uniform belief over Free cells x orientation bins.
PosteriorGrid init_uniform(const OccupancyGrid& grid, int bins);

/// Relative SE(2) motion in the previous pose frame, plus diffusion scale.
struct MotionDelta {
    double dx = 0.0;
    double dy = 0.0;
    double dphi = 0.0;
    double sigma_trans = 0.0;  // meters
    double sigma_rot = 0.0;    // radians
};

/// Motion update: per-bin translation by the bin-rotated delta (bilinear
/// splat), Gaussian blur truncated at 3 sigma, circular orientation shift and
/// blur, Occupied cells re-zeroed, then renormalization.
PosteriorGrid predict(const PosteriorGrid& post, const MotionDelta& delta);

/// Measurement update: multiply by the scorer, re-zero blocked, renormalize.
PosteriorGrid update(const PosteriorGrid& post, Scorer& scorer);

/// Convenience ray-matching update against `obs`.
PosteriorGrid update(const PosteriorGrid& post, HypothesisScans& scans,
                     const RayScan& obs, const LikelihoodParams& params = {});

/// Center pose of the most probable hypothesis (ties -> lowest linear index).
Pose2 argmax_pose(const PosteriorGrid& post);

struct TrackStep {
    Pose2 estimate;
    double entropy = 0.0;
};

struct TrackParams {
    int bins = 36;
    LikelihoodParams like;
    double max_range = 10.0;
    bool unknown_blocks = true;
};

struct TrackResult {
    std::vector<TrackStep> steps;
    PosteriorGrid posterior;  // final belief
};

/// init_uniform, then alternate predict/update over the sequence. deltas[0]
/// is ignored (the first step has no motion). `on_step` (optional) receives
/// the posterior after each update.
TrackResult track(const OccupancyGrid& grid, std::span<const RayScan> observations,
                  std::span<const MotionDelta> deltas, const TrackParams& params = {},
                  const std::function<void(int, const PosteriorGrid&)>& on_step = {});

}  // namespace floorloc
